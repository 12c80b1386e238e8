//! Junction and contact angle measurement.

use std::collections::{HashMap, HashSet};

use crate::cluster::{BoundaryFacet, Cluster, Point};
use crate::error::{Error, Result};

use super::{rot_m90, unit_normal};

#[derive(Clone, Debug, PartialEq)]
pub struct JunctionAngle {
    pub junction: usize,
    /// Entry index into the junction's vertex lists.
    pub entry: usize,
    pub surfaces: [usize; 3],
    /// Angles in degrees between the surface pairs (0,1), (1,2), (2,0).
    pub angles_deg: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContactAngle {
    pub boundary: usize,
    pub vertex: usize,
    /// `arccos(n . nu)` in degrees.
    pub angle_deg: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AngleReport {
    pub junctions: Vec<JunctionAngle>,
    pub contacts: Vec<ContactAngle>,
}

/// Ordered walk along a 2D curve starting at endpoint `v`.
fn curve_walk(simplices: &[Vec<usize>], v: usize, steps: usize) -> Vec<usize> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut prev: HashMap<usize, usize> = HashMap::new();
    for s in simplices {
        next.insert(s[0], s[1]);
        prev.insert(s[1], s[0]);
    }
    let forward = next.contains_key(&v);
    let mut out = vec![v];
    let mut cur = v;
    for _ in 0..steps {
        let n = if forward { next.get(&cur) } else { prev.get(&cur) };
        match n {
            Some(&n) if n != v => {
                out.push(n);
                cur = n;
            }
            _ => break,
        }
    }
    out
}

/// Unit tangent at `p[0]` pointing along the ordered points, from quadratic
/// interpolation in chord length (or the chord if only two points are given).
fn end_tangent(p: &[Point]) -> Point {
    if p.len() < 3 {
        return (p[1] - p[0]).normalize();
    }
    let s1 = (p[1] - p[0]).norm();
    let s2 = s1 + (p[2] - p[1]).norm();
    let d = p[0] * (-(s1 + s2) / (s1 * s2)) + p[1] * (s2 / (s1 * (s2 - s1))) - p[2] * (s1 / (s2 * (s2 - s1)));
    d.normalize()
}

/// Pairwise sector angles between three coplanar directions, for the pairs
/// (0,1), (1,2), (2,0).
fn sector_angles(dirs: &[Point; 3], tau: &Point) -> [f64; 3] {
    let e1 = dirs[0];
    let e2 = tau.cross(&e1);
    let phi = dirs.map(|d| d.dot(&e2).atan2(d.dot(&e1)).rem_euclid(std::f64::consts::TAU));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| phi[a].total_cmp(&phi[b]));
    let mut out = [0.0; 3];
    for j in 0..3 {
        let (a, b) = (order[j], order[(j + 1) % 3]);
        let mut gap = phi[b] - phi[a];
        if j == 2 {
            gap += std::f64::consts::TAU;
        }
        let slot = match (a.min(b), a.max(b)) {
            (0, 1) => 0,
            (1, 2) => 1,
            _ => 2,
        };
        out[slot] = gap.to_degrees();
    }
    out
}

fn junction_angles_2d(cluster: &Cluster, pos: &[Vec<Point>]) -> Vec<JunctionAngle> {
    let mut out = Vec::new();
    for (k, tj) in cluster.junctions.iter().enumerate() {
        let surfaces = tj.surfaces();
        let dirs = [0, 1, 2].map(|j| {
            let s = surfaces[j];
            let walk = curve_walk(&cluster.patches[s].simplices, tj.correspondence[j][0], 2);
            let pts: Vec<Point> = walk.iter().map(|&v| pos[s][v]).collect();
            end_tangent(&pts)
        });
        out.push(JunctionAngle {
            junction: k,
            entry: 0,
            surfaces,
            angles_deg: sector_angles(&dirs, &Point::z()),
        });
    }
    out
}

fn junction_angles_3d(cluster: &Cluster, pos: &[Vec<Point>]) -> Vec<JunctionAngle> {
    let facets: Vec<Vec<(usize, usize, usize)>> = cluster
        .patches
        .iter()
        .map(|p| {
            p.boundary_facets()
                .into_iter()
                .filter_map(|f| match f {
                    BoundaryFacet::Edge { a, b, element } => Some((a, b, element)),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for (k, tj) in cluster.junctions.iter().enumerate() {
        let surfaces = tj.surfaces();
        let members: Vec<HashSet<usize>> = tj.correspondence.iter().map(|c| c.iter().copied().collect()).collect();
        for l in 0..tj.len() {
            let s0 = surfaces[0];
            let v0 = tj.correspondence[0][l];
            let nbrs: Vec<Point> = facets[s0]
                .iter()
                .filter_map(|&(a, b, _)| {
                    if a == v0 && members[0].contains(&b) {
                        Some(pos[s0][b])
                    } else if b == v0 && members[0].contains(&a) {
                        Some(pos[s0][a])
                    } else {
                        None
                    }
                })
                .collect();
            let tau = match nbrs.len() {
                0 => continue,
                1 => (nbrs[0] - pos[s0][v0]).normalize(),
                _ => (nbrs[1] - nbrs[0]).normalize(),
            };
            let mut dirs = [Point::zeros(); 3];
            for j in 0..3 {
                let s = surfaces[j];
                let v = tj.correspondence[j][l];
                let simplices = &cluster.patches[s].simplices;
                let mut d = Point::zeros();
                for &(a, b, e) in &facets[s] {
                    let other = if a == v { b } else if b == v { a } else { continue };
                    if !members[j].contains(&other) {
                        continue;
                    }
                    let p = simplices[e].iter().copied().find(|&x| x != a && x != b).unwrap();
                    let mid = 0.5 * (pos[s][a] + pos[s][b]);
                    let w = pos[s][p] - mid;
                    let w = w - tau * w.dot(&tau);
                    d += w.normalize();
                }
                dirs[j] = d.normalize();
            }
            out.push(JunctionAngle { junction: k, entry: l, surfaces, angles_deg: sector_angles(&dirs, &tau) });
        }
    }
    out
}

fn contact_angles_2d(cluster: &Cluster, pos: &[Vec<Point>]) -> Result<Vec<ContactAngle>> {
    let mut out = Vec::new();
    for (k, b) in cluster.boundaries.iter().enumerate() {
        let s = b.surface();
        let v = b.chain[0];
        let patch = &cluster.patches[s];
        let at_end = patch
            .endpoint_is_end(v)
            .ok_or_else(|| Error::InvalidCluster(format!("boundary {k}: vertex {v} is not a curve endpoint")))?;
        let walk = curve_walk(&patch.simplices, v, 2);
        let pts: Vec<Point> = walk.iter().map(|&w| pos[s][w]).collect();
        let inward = end_tangent(&pts);
        let t = if at_end { -inward } else { inward };
        let nu = rot_m90(&t);
        let c = b.plane_normal.dot(&nu).clamp(-1.0, 1.0);
        out.push(ContactAngle { boundary: k, vertex: v, angle_deg: c.acos().to_degrees() });
    }
    Ok(out)
}

/// 3D contact angles. At each chain vertex, `n . nu` of the triangles in the
/// two rings around it is fitted linearly in the height above the plane (taken
/// at the middle of each triangle's height range) and evaluated on the plane.
fn contact_angles_3d(cluster: &Cluster, pos: &[Vec<Point>]) -> Vec<ContactAngle> {
    let mut out = Vec::new();
    for (k, b) in cluster.boundaries.iter().enumerate() {
        let s = b.surface();
        let patch = &cluster.patches[s];
        let star = patch.vertex_elements();
        let (n, c) = (b.plane_normal, b.plane_point);
        let height = |x: usize| (pos[s][x] - c).dot(&n);
        for &v in b.vertices() {
            let mut ring: Vec<usize> = star[v].clone();
            for &e in &star[v] {
                for &w in &patch.simplices[e] {
                    ring.extend_from_slice(&star[w]);
                }
            }
            ring.sort_unstable();
            ring.dedup();
            let mut samples = Vec::new();
            for &e in &ring {
                let simplex = &patch.simplices[e];
                let q: Vec<Point> = simplex.iter().map(|&x| pos[s][x]).collect();
                if let Some(nu) = unit_normal(&q) {
                    let (lo, hi) = simplex.iter().map(|&x| height(x)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z), hi.max(z)));
                    samples.push((0.5 * (lo + hi), n.dot(&nu)));
                }
            }
            if samples.is_empty() {
                continue;
            }
            let m = samples.len() as f64;
            let zbar = samples.iter().map(|s| s.0).sum::<f64>() / m;
            let ybar = samples.iter().map(|s| s.1).sum::<f64>() / m;
            let szz: f64 = samples.iter().map(|s| (s.0 - zbar).powi(2)).sum();
            let szy: f64 = samples.iter().map(|s| (s.0 - zbar) * (s.1 - ybar)).sum();
            let spread = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
            let cos = if szz > 1e-6 * spread * spread && spread > 0.0 {
                ybar - zbar * szy / szz
            } else {
                ybar
            };
            out.push(ContactAngle { boundary: k, vertex: v, angle_deg: cos.clamp(-1.0, 1.0).acos().to_degrees() });
        }
    }
    out
}

/// Triple-junction angles at every junction vertex and contact angles at every
/// boundary vertex.
pub fn measure_angles(cluster: &Cluster, pos: &[Vec<Point>]) -> Result<AngleReport> {
    if cluster.dim == 2 {
        Ok(AngleReport { junctions: junction_angles_2d(cluster, pos), contacts: contact_angles_2d(cluster, pos)? })
    } else {
        Ok(AngleReport { junctions: junction_angles_3d(cluster, pos), contacts: contact_angles_3d(cluster, pos) })
    }
}
