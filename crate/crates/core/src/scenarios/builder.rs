//! Shared construction steps: orientation signs and validation.

use crate::cluster::{BoundaryLine, Cluster, EnergyModel, Point, Region, SurfacePatch, TripleJunction};
use crate::error::{Error, Result};
use crate::geometry::{gather, orientation_vector};
use crate::validate::{junction_orientation_from_geometry, validate};

pub(crate) struct RegionSpec {
    pub surfaces: Vec<usize>,
    /// A point inside the region from which every bounding surface is visible.
    pub interior: Point,
    pub boundaries: Vec<usize>,
    pub reference: Point,
}

pub(crate) struct JunctionSpec {
    pub surfaces: [usize; 3],
    pub vertices: [Vec<usize>; 3],
}

pub(crate) struct ClusterBuilder {
    pub dim: usize,
    pub patches: Vec<SurfacePatch>,
    pub junctions: Vec<JunctionSpec>,
    pub boundaries: Vec<BoundaryLine>,
    pub regions: Vec<RegionSpec>,
}

impl ClusterBuilder {
    pub fn new(dim: usize) -> Self {
        Self { dim, patches: Vec::new(), junctions: Vec::new(), boundaries: Vec::new(), regions: Vec::new() }
    }

    pub fn add_patch(&mut self, vertices: Vec<Point>, simplices: Vec<Vec<usize>>) -> usize {
        let id = self.patches.len();
        self.patches.push(SurfacePatch { surface_id: id, dim: self.dim, vertices, simplices, sigma: 1.0 });
        id
    }

    pub fn add_boundary(&mut self, surface: usize, chain: Vec<usize>, plane_point: Point, plane_normal: Point, rho: f64) -> usize {
        let id = self.boundaries.len();
        let part = self.boundaries.iter().filter(|b| b.surface() == surface).count();
        self.boundaries.push(BoundaryLine {
            bl_id: id,
            incident: (surface, part),
            plane_point,
            plane_normal,
            contact_param: rho,
            chain,
        });
        id
    }

    /// Sign of the cone volume of `surface` seen from `p`.
    fn cone_sign(&self, surface: usize, p: &Point) -> i8 {
        let patch = &self.patches[surface];
        let mut sum = 0.0;
        for s in &patch.simplices {
            let (q, n) = gather(&patch.vertices, s);
            sum += (q[0] - p).dot(&orientation_vector(&q[..n]));
        }
        if sum >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn build(self) -> Result<Cluster> {
        let ns = self.patches.len();
        let regions = self
            .regions
            .iter()
            .enumerate()
            .map(|(l, r)| {
                let mut orientation = vec![1i8; ns];
                for &s in &r.surfaces {
                    orientation[s] = self.cone_sign(s, &r.interior);
                }
                Region {
                    region_id: l,
                    surface_set: r.surfaces.clone(),
                    orientation,
                    plane_set: r.boundaries.clone(),
                    reference_point: r.reference,
                }
            })
            .collect();
        let mut parts = vec![0usize; ns];
        for b in &self.boundaries {
            parts[b.surface()] += 1;
        }
        let junctions = self
            .junctions
            .into_iter()
            .enumerate()
            .map(|(k, j)| {
                let mut order = [0usize, 1, 2];
                order.sort_by_key(|&i| j.surfaces[i]);
                let incident = order.map(|i| {
                    let s = j.surfaces[i];
                    parts[s] += 1;
                    (s, parts[s] - 1)
                });
                TripleJunction {
                    tj_id: k,
                    incident,
                    orientation: [1, 1, 1],
                    correspondence: order.map(|i| j.vertices[i].clone()),
                }
            })
            .collect();
        let mut cluster = Cluster {
            dim: self.dim,
            patches: self.patches,
            junctions,
            boundaries: self.boundaries,
            regions,
            energy_model: EnergyModel::Isotropic,
        };
        for k in 0..cluster.junctions.len() {
            let o = junction_orientation_from_geometry(&cluster, k)
                .ok_or_else(|| Error::InvalidCluster(format!("junction {k}: cannot determine orientation")))?;
            cluster.junctions[k].orientation = o;
        }
        let report = validate(&cluster);
        if !report.is_ok() {
            return Err(Error::InvalidCluster(report.to_string()));
        }
        Ok(cluster)
    }
}
