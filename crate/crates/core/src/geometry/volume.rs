//! Enclosed volumes, wetted areas and their discrete changes.

use crate::cluster::{Cluster, Point};
use crate::error::{Error, Result};

use super::{gather, integrated_orientation, orientation_vector, rot_m90, xi_2d};

fn factorial_inv(d: usize) -> f64 {
    if d == 3 {
        0.5
    } else {
        1.0
    }
}

/// Point on the line shared by the planes of boundary lines `k` and `other`,
/// closest to the plane point of `k`.
fn corner_anchor(cluster: &Cluster, k: usize, other: usize) -> Point {
    let a = &cluster.boundaries[k];
    let b = &cluster.boundaries[other];
    let (n1, n2) = (a.plane_normal, b.plane_normal);
    let g = n1.dot(&n2);
    let (d1, d2) = (n1.dot(&a.plane_point), n2.dot(&b.plane_point));
    let det = 1.0 - g * g;
    let p = n1 * ((d1 - g * d2) / det) + n2 * ((d2 - g * d1) / det);
    let u = n1.cross(&n2).normalize();
    p + u * (a.plane_point - p).dot(&u)
}

/// Other boundary line of the same surface whose chain contains vertex `v`.
fn corner_partner(cluster: &Cluster, k: usize, v: usize) -> Option<usize> {
    let s = cluster.boundaries[k].surface();
    cluster
        .boundaries
        .iter()
        .enumerate()
        .find(|(j, b)| *j != k && b.surface() == s && b.chain.contains(&v))
        .map(|(j, _)| j)
}

/// Area of the side `G^-` of boundary line `k`, up to an additive constant that
/// depends only on the fixed plane data.
pub fn wetted_area(cluster: &Cluster, pos: &[Vec<Point>], k: usize) -> Result<f64> {
    let b = &cluster.boundaries[k];
    let i = b.surface();
    let x = &pos[i];
    let (n, c) = (b.plane_normal, b.plane_point);
    if cluster.dim == 2 {
        let v = b.chain[0];
        let at_end = cluster.patches[i]
            .endpoint_is_end(v)
            .ok_or_else(|| Error::InvalidCluster(format!("boundary {k}: vertex {v} is not a curve endpoint")))?;
        return Ok((x[v] - c).dot(&xi_2d(&n, at_end)));
    }
    let fan = |p: &Point, q: &Point| 0.5 * (p - c).cross(&(q - c)).dot(&n);
    let mut area: f64 = b.segments().map(|(u, v)| fan(&x[u], &x[v])).sum();
    if !b.is_closed() {
        let (first, last) = (b.chain[0], *b.chain.last().unwrap());
        if let Some(o) = corner_partner(cluster, k, first) {
            area += fan(&corner_anchor(cluster, k, o), &x[first]);
        }
        if let Some(o) = corner_partner(cluster, k, last) {
            area += fan(&x[last], &corner_anchor(cluster, k, o));
        }
    }
    Ok(-area)
}

/// Volume (area in 2D) of region `l`.
///
/// Regions bounded in part by planes are exact up to an additive constant,
/// which vanishes when the reference point lies on every bounding plane.
pub fn region_volume(cluster: &Cluster, pos: &[Vec<Point>], l: usize) -> Result<f64> {
    let r = &cluster.regions[l];
    let d = cluster.dim;
    let xr = r.reference_point;
    let mut sum = 0.0;
    for &i in &r.surface_set {
        let o = f64::from(r.orientation[i]);
        let x = &pos[i];
        let mut s = 0.0;
        for simplex in &cluster.patches[i].simplices {
            let (q, n) = gather(x, simplex);
            s += (q[0] - xr).dot(&orientation_vector(&q[..n]));
        }
        sum += o * s * factorial_inv(d);
    }
    for &k in &r.plane_set {
        let b = &cluster.boundaries[k];
        let h = (b.plane_point - xr).dot(&b.plane_normal);
        if h != 0.0 {
            let o = f64::from(r.orientation[b.surface()]);
            sum -= h * o * wetted_area(cluster, pos, k)?;
        }
    }
    Ok(sum / d as f64)
}

pub fn region_volumes(cluster: &Cluster, pos: &[Vec<Point>]) -> Result<Vec<f64>> {
    (0..cluster.regions.len()).map(|l| region_volume(cluster, pos, l)).collect()
}

/// Volume change of region `l` from the time-weighted normals:
/// `<(X - id) . nu^{m+1/2}, chi_l>` with mass lumping.
pub fn volume_change_lemma(cluster: &Cluster, old: &[Vec<Point>], new: &[Vec<Point>], l: usize) -> f64 {
    let r = &cluster.regions[l];
    let d = cluster.dim;
    let mut sum = 0.0;
    for &i in &r.surface_set {
        let o = f64::from(r.orientation[i]);
        let mut s = 0.0;
        for simplex in &cluster.patches[i].simplices {
            let (q0, n) = gather(&old[i], simplex);
            let (q1, _) = gather(&new[i], simplex);
            let w = integrated_orientation(&q0[..n], &q1[..n]) * factorial_inv(d);
            let disp: Point = (0..n).map(|k| q1[k] - q0[k]).sum();
            s += w.dot(&disp);
        }
        sum += o * s / d as f64;
    }
    sum
}

fn tet_volume(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

fn tri_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let (u, v) = (b - a, c - a);
    0.5 * (u.x * v.y - u.y * v.x)
}

fn lex_less(a: &Point, b: &Point) -> bool {
    (a.x, a.y, a.z) < (b.x, b.y, b.z)
}

/// Signed volume swept by a triangle, split into three tetrahedra. The split
/// follows a global vertex order so that shared side faces are cut the same
/// way from both sides.
fn swept_triangle(q0: &[Point; 3], q1: &[Point; 3]) -> f64 {
    let mut idx = [0usize, 1, 2];
    let mut parity = 1.0;
    for i in 0..3 {
        for j in 0..2 - i {
            if lex_less(&q0[idx[j + 1]], &q0[idx[j]]) {
                idx.swap(j, j + 1);
                parity = -parity;
            }
        }
    }
    let [a, b, c] = idx.map(|k| q0[k]);
    let [a1, b1, c1] = idx.map(|k| q1[k]);
    parity * (tet_volume(&a, &b, &c, &a1) + tet_volume(&b, &c, &a1, &b1) + tet_volume(&c, &a1, &b1, &c1))
}

fn swept_segment(q0: &[Point; 3], q1: &[Point; 3]) -> f64 {
    let (a, b) = (q0[0], q0[1]);
    let (a1, b1) = (q1[0], q1[1]);
    tri_area(&a, &b1, &b) + tri_area(&a, &a1, &b1)
}

/// Volume change of region `l` from swept prisms, independent of the
/// time-weighted normals.
pub fn volume_change_oracle(cluster: &Cluster, old: &[Vec<Point>], new: &[Vec<Point>], l: usize) -> f64 {
    let r = &cluster.regions[l];
    let mut sum = 0.0;
    for &i in &r.surface_set {
        let o = f64::from(r.orientation[i]);
        let mut s = 0.0;
        for simplex in &cluster.patches[i].simplices {
            let (q0, _) = gather(&old[i], simplex);
            let (q1, _) = gather(&new[i], simplex);
            s += if cluster.dim == 2 { swept_segment(&q0, &q1) } else { swept_triangle(&q0, &q1) };
        }
        sum += o * s;
    }
    sum
}

/// Changes `(d|G^+|, d|G^-|)` of boundary line `k` from the time-weighted `xi`.
pub fn contact_area_change_lemma(
    cluster: &Cluster,
    old: &[Vec<Point>],
    new: &[Vec<Point>],
    k: usize,
) -> Result<(f64, f64)> {
    let b = &cluster.boundaries[k];
    let i = b.surface();
    let n = b.plane_normal;
    let minus = if cluster.dim == 2 {
        let v = b.chain[0];
        let at_end = cluster.patches[i]
            .endpoint_is_end(v)
            .ok_or_else(|| Error::InvalidCluster(format!("boundary {k}: vertex {v} is not a curve endpoint")))?;
        xi_2d(&n, at_end).dot(&(new[i][v] - old[i][v]))
    } else {
        b.segments()
            .map(|(u, v)| {
                let f0 = old[i][v] - old[i][u];
                let f1 = new[i][v] - new[i][u];
                let disp = 0.5 * ((new[i][u] - old[i][u]) + (new[i][v] - old[i][v]));
                0.5 * n.cross(&(f0 + f1)).dot(&disp)
            })
            .sum()
    };
    Ok((-minus, minus))
}

/// Changes `(d|G^+|, d|G^-|)` of boundary line `k` computed from swept in-plane
/// quadrilaterals (3D) or the conormal decomposition (2D).
pub fn contact_area_change_oracle(
    cluster: &Cluster,
    old: &[Vec<Point>],
    new: &[Vec<Point>],
    k: usize,
) -> Result<(f64, f64)> {
    let b = &cluster.boundaries[k];
    let i = b.surface();
    let (n, c) = (b.plane_normal, b.plane_point);
    let scale = cluster.bbox_diameter(old).max(1.0);
    for &v in &b.chain {
        for x in [old[i][v], new[i][v]] {
            if (x - c).dot(&n).abs() > 1e-9 * scale {
                return Err(Error::Domain(format!("boundary {k}: chain vertex {v} is off its plane")));
            }
        }
    }
    let minus = if cluster.dim == 2 {
        let v = b.chain[0];
        let patch = &cluster.patches[i];
        let (e, inward) = patch
            .simplices
            .iter()
            .enumerate()
            .find_map(|(e, s)| {
                if s[0] == v {
                    Some((e, s[1]))
                } else if s[1] == v {
                    Some((e, s[0]))
                } else {
                    None
                }
            })
            .ok_or_else(|| Error::InvalidCluster(format!("boundary {k}: vertex {v} has no element")))?;
        let s = &patch.simplices[e];
        let nu = rot_m90(&(old[i][s[1]] - old[i][s[0]])).normalize();
        let mu = (old[i][v] - old[i][inward]).normalize();
        let xi = n.dot(&nu) * mu - n.dot(&mu) * nu;
        xi.normalize().dot(&(new[i][v] - old[i][v]))
    } else {
        let shoelace = |p: &[Point]| -> f64 {
            (0..p.len()).map(|j| 0.5 * p[j].cross(&p[(j + 1) % p.len()]).dot(&n)).sum()
        };
        b.segments()
            .map(|(u, v)| shoelace(&[old[i][u] - c, old[i][v] - c, new[i][v] - c, new[i][u] - c]))
            .sum()
    };
    Ok((-minus, minus))
}
