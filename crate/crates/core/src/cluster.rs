//! Cluster data model: surface patches, triple junctions, boundary lines and regions.
//!
//! All indices are zero based. Points are stored as 3-vectors; in two dimensions
//! the third component is zero.

use std::collections::HashMap;

use crate::anisotropy::Anisotropy;
use crate::error::{Error, Result};

pub type Point = nalgebra::Vector3<f64>;

/// Vertex positions of every surface, indexed `[surface][vertex]`.
pub type Positions = Vec<Vec<Point>>;

/// Tolerance for junction vertex coincidence and plane membership.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Simplices smaller than this times `diam^(d-1)` are treated as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePatch {
    pub surface_id: usize,
    pub dim: usize,
    pub vertices: Vec<Point>,
    /// Oriented simplices: segments `[a, b]` in 2D, triangles `[a, b, c]` in 3D.
    pub simplices: Vec<Vec<usize>>,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleJunction {
    pub tj_id: usize,
    /// `(surface, boundary part)` pairs sorted by surface id.
    pub incident: [(usize, usize); 3],
    pub orientation: [i8; 3],
    /// Vertex lists, one per incident surface, matched entry by entry.
    pub correspondence: [Vec<usize>; 3],
}

impl TripleJunction {
    pub fn surfaces(&self) -> [usize; 3] {
        [self.incident[0].0, self.incident[1].0, self.incident[2].0]
    }

    pub fn len(&self) -> usize {
        self.correspondence[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.correspondence[0].is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLine {
    pub bl_id: usize,
    pub incident: (usize, usize),
    pub plane_point: Point,
    pub plane_normal: Point,
    /// Contact parameter `rho`.
    pub contact_param: f64,
    /// 2D: a single vertex. 3D: vertices ordered along `mu x nu`; closed loops
    /// repeat the first vertex at the end.
    pub chain: Vec<usize>,
}

impl BoundaryLine {
    pub fn surface(&self) -> usize {
        self.incident.0
    }

    /// Chain segments as consecutive vertex pairs.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.chain.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_closed(&self) -> bool {
        self.chain.len() > 2 && self.chain.first() == self.chain.last()
    }

    /// Distinct chain vertices.
    pub fn vertices(&self) -> &[usize] {
        if self.is_closed() {
            &self.chain[..self.chain.len() - 1]
        } else {
            &self.chain
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub region_id: usize,
    pub surface_set: Vec<usize>,
    /// One sign per surface of the cluster; only entries in `surface_set` are used.
    pub orientation: Vec<i8>,
    pub plane_set: Vec<usize>,
    pub reference_point: Point,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum EnergyModel {
    /// Isotropic energy with the per-patch `sigma` values.
    #[default]
    Isotropic,
    Anisotropic(Anisotropy),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub dim: usize,
    pub patches: Vec<SurfacePatch>,
    pub junctions: Vec<TripleJunction>,
    pub boundaries: Vec<BoundaryLine>,
    pub regions: Vec<Region>,
    pub energy_model: EnergyModel,
}

/// Boundary facet of a patch: a vertex in 2D, a directed edge in 3D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryFacet {
    /// Curve endpoint; `at_end` is true if the vertex is the end of its segment.
    Endpoint { vertex: usize, element: usize, at_end: bool },
    /// Edge `(a, b)` directed as in its only triangle.
    Edge { a: usize, b: usize, element: usize },
}

impl SurfacePatch {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.simplices.len()
    }

    /// Boundary facets of the patch mesh.
    pub fn boundary_facets(&self) -> Vec<BoundaryFacet> {
        if self.dim == 2 {
            let mut starts: HashMap<usize, usize> = HashMap::new();
            let mut ends: HashMap<usize, usize> = HashMap::new();
            for (e, s) in self.simplices.iter().enumerate() {
                starts.insert(s[0], e);
                ends.insert(s[1], e);
            }
            let mut out = Vec::new();
            for (e, s) in self.simplices.iter().enumerate() {
                if !ends.contains_key(&s[0]) {
                    out.push(BoundaryFacet::Endpoint { vertex: s[0], element: e, at_end: false });
                }
                if !starts.contains_key(&s[1]) {
                    out.push(BoundaryFacet::Endpoint { vertex: s[1], element: e, at_end: true });
                }
            }
            out
        } else {
            let mut count: HashMap<(usize, usize), usize> = HashMap::new();
            for s in &self.simplices {
                for j in 0..3 {
                    let (a, b) = (s[j], s[(j + 1) % 3]);
                    *count.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            let mut out = Vec::new();
            for (e, s) in self.simplices.iter().enumerate() {
                for j in 0..3 {
                    let (a, b) = (s[j], s[(j + 1) % 3]);
                    if count[&(a.min(b), a.max(b))] == 1 {
                        out.push(BoundaryFacet::Edge { a, b, element: e });
                    }
                }
            }
            out
        }
    }

    /// Set of vertices lying on the mesh boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for f in self.boundary_facets() {
            match f {
                BoundaryFacet::Endpoint { vertex, .. } => on[vertex] = true,
                BoundaryFacet::Edge { a, b, .. } => {
                    on[a] = true;
                    on[b] = true;
                }
            }
        }
        on
    }

    /// For a 2D curve endpoint, whether it is the last vertex of the curve.
    pub fn endpoint_is_end(&self, v: usize) -> Option<bool> {
        let as_start = self.simplices.iter().any(|s| s[0] == v);
        let as_end = self.simplices.iter().any(|s| s[1] == v);
        match (as_start, as_end) {
            (false, true) => Some(true),
            (true, false) => Some(false),
            _ => None,
        }
    }

    /// Elements incident to each vertex.
    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (e, s) in self.simplices.iter().enumerate() {
            for &v in s {
                out[v].push(e);
            }
        }
        out
    }
}

impl Cluster {
    pub fn num_surfaces(&self) -> usize {
        self.patches.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.patches.iter().map(|p| p.vertices.len()).sum()
    }

    pub fn positions(&self) -> Positions {
        self.patches.iter().map(|p| p.vertices.clone()).collect()
    }

    pub fn set_positions(&mut self, pos: &[Vec<Point>]) {
        for (p, x) in self.patches.iter_mut().zip(pos) {
            p.vertices.clone_from(x);
        }
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.patches.iter().map(|p| p.sigma).collect()
    }

    /// Diameter of the bounding box of all vertices.
    pub fn bbox_diameter(&self, pos: &[Vec<Point>]) -> f64 {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for x in pos.iter().flatten() {
            lo = lo.inf(x);
            hi = hi.sup(x);
        }
        if lo.x > hi.x {
            return 0.0;
        }
        (hi - lo).norm()
    }

    pub fn energy_model(&self) -> &EnergyModel {
        &self.energy_model
    }

    /// Replace the contact parameters of all boundary lines.
    pub fn set_contact_params(&mut self, rho: &[f64]) -> Result<()> {
        if rho.len() == 1 {
            for b in &mut self.boundaries {
                b.contact_param = rho[0];
            }
            return Ok(());
        }
        if rho.len() != self.boundaries.len() {
            return Err(Error::Config(format!(
                "rho has {} entries but the cluster has {} boundary lines",
                rho.len(),
                self.boundaries.len()
            )));
        }
        for (b, &r) in self.boundaries.iter_mut().zip(rho) {
            b.contact_param = r;
        }
        Ok(())
    }

    /// Replace per-surface surface tensions.
    pub fn set_sigmas(&mut self, sigma: &[f64]) -> Result<()> {
        if sigma.len() != self.patches.len() {
            return Err(Error::Config(format!(
                "sigma has {} entries but the cluster has {} surfaces",
                sigma.len(),
                self.patches.len()
            )));
        }
        if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Config("surface tensions must be positive".into()));
        }
        for (p, &s) in self.patches.iter_mut().zip(sigma) {
            p.sigma = s;
        }
        Ok(())
    }
}

/// Largest ratio of maximal to minimal element measure over all surfaces.
pub fn mesh_ratio(cluster: &Cluster, pos: &[Vec<Point>]) -> Result<f64> {
    let mut ratio: f64 = 1.0;
    for (i, patch) in cluster.patches.iter().enumerate() {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (e, s) in patch.simplices.iter().enumerate() {
            let m = crate::geometry::simplex_measure_at(&pos[i], s);
            if m <= 0.0 {
                return Err(Error::DegenerateSimplex { surface: i, element: e, measure: m });
            }
            lo = lo.min(m);
            hi = hi.max(m);
        }
        if hi > 0.0 {
            ratio = ratio.max(hi / lo);
        }
    }
    Ok(ratio)
}
