//! Structural and geometric validation of clusters.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::cluster::{BoundaryFacet, Cluster, EnergyModel, Point, COINCIDENCE_TOL, DEGENERATE_TOL};
use crate::geometry::{gather, orientation_vector, region_volume, rot_m90, simplex_measure_at, unit_normal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Patch,
    DegenerateSimplex,
    NonManifold,
    Orientation,
    Junction,
    CorrespondenceMismatch,
    JunctionOrientation,
    Boundary,
    OffPlane,
    ChainOrder,
    FreeBoundary,
    Region,
    RegionJunction,
    RegionOrientation,
    Energy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation { kind, message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", v.message)?;
        }
        Ok(())
    }
}

pub fn validate(cluster: &Cluster) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let d = cluster.dim;
    if d != 2 && d != 3 {
        rep.push(ViolationKind::Patch, format!("unsupported dimension {d}"));
        return rep;
    }
    let pos = cluster.positions();
    let diam = cluster.bbox_diameter(&pos);
    let scale = diam.max(1.0);

    let mut patches_ok = true;
    for i in 0..cluster.patches.len() {
        let before = rep.violations.len();
        check_patch(cluster, i, diam, &mut rep);
        if rep.violations[before..].iter().any(|v| v.kind == ViolationKind::Patch) {
            patches_ok = false;
        }
    }
    if !patches_ok {
        return rep;
    }

    let boundary_sets: Vec<Vec<bool>> = cluster.patches.iter().map(|p| p.boundary_vertices()).collect();
    let mut covered: Vec<HashSet<usize>> = vec![HashSet::new(); cluster.patches.len()];
    let ns = cluster.patches.len();

    for (k, tj) in cluster.junctions.iter().enumerate() {
        let s = tj.surfaces();
        if s.iter().any(|&x| x >= ns) || !(s[0] < s[1] && s[1] < s[2]) {
            rep.push(ViolationKind::Junction, format!("junction {k}: surfaces {s:?} must be distinct, sorted and in range"));
            continue;
        }
        let len = tj.correspondence[0].len();
        if len == 0 || tj.correspondence.iter().any(|c| c.len() != len) {
            rep.push(ViolationKind::Junction, format!("junction {k}: vertex lists must be non-empty and of equal length"));
            continue;
        }
        if d == 2 && len != 1 {
            rep.push(ViolationKind::Junction, format!("junction {k}: 2D junctions have exactly one vertex"));
            continue;
        }
        if tj.orientation.iter().any(|o| o.abs() != 1) {
            rep.push(ViolationKind::Junction, format!("junction {k}: orientation entries must be +1 or -1"));
        }
        let mut bad_index = false;
        for j in 0..3 {
            for &v in &tj.correspondence[j] {
                if v >= cluster.patches[s[j]].vertices.len() {
                    bad_index = true;
                } else {
                    covered[s[j]].insert(v);
                    if !boundary_sets[s[j]][v] {
                        rep.push(ViolationKind::Junction, format!("junction {k}: vertex {v} is not on the boundary of surface {}", s[j]));
                    }
                }
            }
        }
        if bad_index {
            rep.push(ViolationKind::Junction, format!("junction {k}: vertex index out of range"));
            continue;
        }
        for l in 0..len {
            let x0 = pos[s[0]][tj.correspondence[0][l]];
            for j in 1..3 {
                let xj = pos[s[j]][tj.correspondence[j][l]];
                if (xj - x0).norm() > COINCIDENCE_TOL * scale {
                    rep.push(
                        ViolationKind::CorrespondenceMismatch,
                        format!("correspondence mismatch at (k={k}, l={l}): distance {:e}", (xj - x0).norm()),
                    );
                }
            }
        }
        if !rep.has(ViolationKind::CorrespondenceMismatch) {
            check_junction_orientation(cluster, k, &mut rep);
        }
    }

    for (k, b) in cluster.boundaries.iter().enumerate() {
        let s = b.surface();
        if s >= ns {
            rep.push(ViolationKind::Boundary, format!("boundary {k}: surface {s} out of range"));
            continue;
        }
        if (b.plane_normal.norm() - 1.0).abs() > 1e-12 {
            rep.push(ViolationKind::Boundary, format!("boundary {k}: plane normal is not a unit vector"));
        }
        let nv = cluster.patches[s].vertices.len();
        if b.chain.is_empty() || b.chain.iter().any(|&v| v >= nv) || (d == 2 && b.chain.len() != 1) || (d == 3 && b.chain.len() < 2) {
            rep.push(ViolationKind::Boundary, format!("boundary {k}: malformed chain"));
            continue;
        }
        for &v in &b.chain {
            covered[s].insert(v);
            let off = (pos[s][v] - b.plane_point).dot(&b.plane_normal).abs();
            if off > COINCIDENCE_TOL * scale {
                rep.push(ViolationKind::OffPlane, format!("off-plane boundary vertex: boundary {k}, vertex {v} ({off:e} from its plane)"));
            }
        }
        let facets = cluster.patches[s].boundary_facets();
        if d == 2 {
            let v = b.chain[0];
            if !facets.iter().any(|f| matches!(f, BoundaryFacet::Endpoint { vertex, .. } if *vertex == v)) {
                rep.push(ViolationKind::ChainOrder, format!("boundary {k}: vertex {v} is not a curve endpoint"));
            }
        } else {
            let edges: HashSet<(usize, usize)> = facets
                .iter()
                .filter_map(|f| match f {
                    BoundaryFacet::Edge { a, b, .. } => Some((*a, *b)),
                    _ => None,
                })
                .collect();
            for (u, v) in b.segments() {
                if !edges.contains(&(v, u)) {
                    rep.push(
                        ViolationKind::ChainOrder,
                        format!("boundary {k}: chain segment ({u}, {v}) is not a boundary edge traversed against its triangle"),
                    );
                    break;
                }
            }
        }
    }

    for (s, on) in boundary_sets.iter().enumerate() {
        for (v, &b) in on.iter().enumerate() {
            if b && !covered[s].contains(&v) {
                rep.push(ViolationKind::FreeBoundary, format!("surface {s}: boundary vertex {v} is neither a junction nor a contact vertex"));
                break;
            }
        }
    }

    for l in 0..cluster.regions.len() {
        check_region(cluster, l, &pos, &mut rep);
    }

    if let EnergyModel::Anisotropic(a) = &cluster.energy_model {
        if a.dim() != d {
            rep.push(ViolationKind::Energy, format!("anisotropy is {}-dimensional but the cluster is {d}-dimensional", a.dim()));
        }
    }
    rep
}

fn check_patch(cluster: &Cluster, i: usize, diam: f64, rep: &mut ValidationReport) {
    let p = &cluster.patches[i];
    let d = cluster.dim;
    if p.dim != d || p.surface_id != i {
        rep.push(ViolationKind::Patch, format!("surface {i}: dimension or id mismatch"));
        return;
    }
    if !(p.sigma > 0.0) || !p.sigma.is_finite() {
        rep.push(ViolationKind::Patch, format!("surface {i}: sigma must be positive"));
    }
    if p.vertices.iter().any(|x| !x.iter().all(|c| c.is_finite()) || (d == 2 && x.z != 0.0)) {
        rep.push(ViolationKind::Patch, format!("surface {i}: invalid vertex coordinates"));
        return;
    }
    if p.simplices.is_empty() {
        rep.push(ViolationKind::Patch, format!("surface {i}: no simplices"));
        return;
    }
    let n = p.vertices.len();
    for (e, s) in p.simplices.iter().enumerate() {
        let distinct: HashSet<&usize> = s.iter().collect();
        if s.len() != d || s.iter().any(|&v| v >= n) || distinct.len() != d {
            rep.push(ViolationKind::Patch, format!("surface {i}: simplex {e} is malformed"));
            return;
        }
    }
    let tol = DEGENERATE_TOL * diam.powi(d as i32 - 1);
    for (e, s) in p.simplices.iter().enumerate() {
        let m = simplex_measure_at(&p.vertices, s);
        if m < tol || m == 0.0 {
            rep.push(ViolationKind::DegenerateSimplex, format!("surface {i}: degenerate simplex {e} (measure {m:e})"));
        }
    }
    if d == 2 {
        let mut starts = HashMap::new();
        let mut ends = HashMap::new();
        for s in &p.simplices {
            *starts.entry(s[0]).or_insert(0) += 1;
            *ends.entry(s[1]).or_insert(0) += 1;
        }
        if starts.values().chain(ends.values()).any(|&c| c > 1) {
            rep.push(ViolationKind::NonManifold, format!("surface {i}: a vertex is shared by more than two segments or orientation flips"));
        }
    } else {
        let mut directed = HashSet::new();
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        let mut flipped = false;
        for s in &p.simplices {
            for j in 0..3 {
                let (a, b) = (s[j], s[(j + 1) % 3]);
                if !directed.insert((a, b)) {
                    flipped = true;
                }
                *undirected.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if undirected.values().any(|&c| c > 2) {
            rep.push(ViolationKind::NonManifold, format!("surface {i}: non-manifold face (edge shared by more than two triangles)"));
        } else if flipped {
            rep.push(ViolationKind::Orientation, format!("surface {i}: inconsistent triangle orientation"));
        }
    }
}

/// `(nu, mu)` at a junction facet: element normal and outward conormal, plus
/// the junction tangent.
fn junction_frames(cluster: &Cluster, k: usize) -> Option<([Point; 3], [Point; 3], Point)> {
    let tj = &cluster.junctions[k];
    let s = tj.surfaces();
    let mut nu = [Point::zeros(); 3];
    let mut mu = [Point::zeros(); 3];
    if cluster.dim == 2 {
        for j in 0..3 {
            let p = &cluster.patches[s[j]];
            let v = tj.correspondence[j][0];
            let simplex = p.simplices.iter().find(|x| x.contains(&v))?;
            let other = if simplex[0] == v { simplex[1] } else { simplex[0] };
            nu[j] = rot_m90(&(p.vertices[simplex[1]] - p.vertices[simplex[0]])).normalize();
            mu[j] = (p.vertices[v] - p.vertices[other]).normalize();
        }
        return Some((nu, mu, Point::z()));
    }
    for l in 0..tj.len().saturating_sub(1) {
        let mut tau = Point::zeros();
        let mut ok = true;
        for j in 0..3 {
            let p = &cluster.patches[s[j]];
            let (a, b) = (tj.correspondence[j][l], tj.correspondence[j][l + 1]);
            let Some(simplex) = p.simplices.iter().find(|x| x.contains(&a) && x.contains(&b)) else {
                ok = false;
                break;
            };
            let c = simplex.iter().copied().find(|&x| x != a && x != b).unwrap();
            let (q, n) = gather(&p.vertices, simplex);
            let Some(normal) = unit_normal(&q[..n]) else {
                ok = false;
                break;
            };
            if j == 0 {
                tau = (p.vertices[b] - p.vertices[a]).normalize();
            }
            let w = 0.5 * (p.vertices[a] + p.vertices[b]) - p.vertices[c];
            nu[j] = normal;
            mu[j] = (w - tau * w.dot(&tau)).normalize();
        }
        if ok {
            return Some((nu, mu, tau));
        }
    }
    None
}

fn check_junction_orientation(cluster: &Cluster, k: usize, rep: &mut ValidationReport) {
    let tj = &cluster.junctions[k];
    let Some((nu, mu, tau)) = junction_frames(cluster, k) else {
        return;
    };
    let signs: Vec<f64> = (0..3).map(|j| f64::from(tj.orientation[j]) * nu[j].cross(&mu[j]).dot(&tau)).collect();
    if !(signs.iter().all(|&x| x > 0.0) || signs.iter().all(|&x| x < 0.0)) {
        rep.push(ViolationKind::JunctionOrientation, format!("junction {k}: orientation signs are inconsistent with the geometry"));
    }
}

/// Orientation signs for a junction computed from the geometry, normalized so
/// that the first entry is +1.
pub fn junction_orientation_from_geometry(cluster: &Cluster, k: usize) -> Option<[i8; 3]> {
    let (nu, mu, tau) = junction_frames(cluster, k)?;
    let det: Vec<f64> = (0..3).map(|j| nu[j].cross(&mu[j]).dot(&tau)).collect();
    let c = det[0].signum();
    Some([0, 1, 2].map(|j| if det[j] * c > 0.0 { 1 } else { -1 }))
}

/// Ray-parity test: is `p` enclosed by the surfaces of region `l`?
fn inside_region(cluster: &Cluster, pos: &[Vec<Point>], l: usize, p: &Point) -> bool {
    let r = &cluster.regions[l];
    let dir = Point::new(0.5377, 0.3197, if cluster.dim == 3 { 0.7804 } else { 0.0 }).normalize();
    let mut crossings = 0;
    for &i in &r.surface_set {
        for s in &cluster.patches[i].simplices {
            let (q, _) = gather(&pos[i], s);
            if cluster.dim == 2 {
                let (a, b) = (q[0] - p, q[1] - p);
                let e = b - a;
                let den = dir.x * e.y - dir.y * e.x;
                if den == 0.0 {
                    continue;
                }
                let t = (a.x * e.y - a.y * e.x) / den;
                let u = (a.x * dir.y - a.y * dir.x) / den;
                if t > 0.0 && (0.0..1.0).contains(&u) {
                    crossings += 1;
                }
            } else {
                let (e1, e2) = (q[1] - q[0], q[2] - q[0]);
                let h = dir.cross(&e2);
                let det = e1.dot(&h);
                if det.abs() < 1e-300 {
                    continue;
                }
                let sv = p - q[0];
                let u = sv.dot(&h) / det;
                let qv = sv.cross(&e1);
                let v = dir.dot(&qv) / det;
                let t = e2.dot(&qv) / det;
                if t > 0.0 && u >= 0.0 && v >= 0.0 && u + v < 1.0 {
                    crossings += 1;
                }
            }
        }
    }
    crossings % 2 == 1
}

fn check_region(cluster: &Cluster, l: usize, pos: &[Vec<Point>], rep: &mut ValidationReport) {
    let r = &cluster.regions[l];
    let ns = cluster.patches.len();
    if r.surface_set.is_empty() || r.surface_set.iter().any(|&s| s >= ns) || r.orientation.len() != ns {
        rep.push(ViolationKind::Region, format!("region {l}: invalid surface set or orientation length"));
        return;
    }
    if r.surface_set.iter().any(|&s| r.orientation[s].abs() != 1) {
        rep.push(ViolationKind::Region, format!("region {l}: orientation entries must be +1 or -1"));
        return;
    }
    for &k in &r.plane_set {
        if k >= cluster.boundaries.len() || !r.surface_set.contains(&cluster.boundaries[k].surface()) {
            rep.push(ViolationKind::Region, format!("region {l}: plane {k} is not a boundary line of its surfaces"));
            return;
        }
    }
    for (k, tj) in cluster.junctions.iter().enumerate() {
        let sum: i32 = tj
            .surfaces()
            .iter()
            .enumerate()
            .map(|(j, s)| if r.surface_set.contains(s) { i32::from(tj.orientation[j]) * i32::from(r.orientation[*s]) } else { 0 })
            .sum();
        if sum != 0 {
            rep.push(ViolationKind::RegionJunction, format!("region {l}: indicator violates the condition at junction {k}"));
        }
    }
    match region_volume(cluster, pos, l) {
        Ok(v) if v > 0.0 => {}
        Ok(v) => rep.push(ViolationKind::RegionOrientation, format!("region {l}: non-positive volume {v:e}")),
        Err(e) => rep.push(ViolationKind::Region, format!("region {l}: {e}")),
    }
    if r.plane_set.is_empty() {
        // Step off a facet on either side and check which point is enclosed.
        let i = r.surface_set[0];
        let o = f64::from(r.orientation[i]);
        let s = &cluster.patches[i].simplices[0];
        let (q, n) = gather(&pos[i], s);
        let a = orientation_vector(&q[..n]);
        let centroid = q[..n].iter().sum::<Point>() / n as f64;
        let h = 1e-3 * (q[1] - q[0]).norm();
        let nu = a.normalize() * o;
        let inner = inside_region(cluster, pos, l, &(centroid - nu * h));
        let outer = inside_region(cluster, pos, l, &(centroid + nu * h));
        if !inner || outer {
            rep.push(ViolationKind::RegionOrientation, format!("region {l}: orientation signs do not point out of the region"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_display() {
        let mut r = ValidationReport::default();
        assert_eq!(r.to_string(), "ok");
        r.push(ViolationKind::Junction, "a");
        r.push(ViolationKind::Region, "b");
        assert_eq!(r.to_string(), "a\nb");
        assert!(r.has(ViolationKind::Region));
    }
}
