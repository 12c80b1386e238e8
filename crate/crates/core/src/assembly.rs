//! Assembly of the linear system for one Picard iterate.
//!
//! Unknowns are the reduced curvature dofs followed by the reduced displacement
//! dofs `X^{m+1} - id`. The system reads
//!
//! ```text
//! [ -dt S_k   B  ] [kappa]   [      0       ]
//! [   B^T    S_X ] [ dX  ] = [ f - S_X id   ]
//! ```

use nalgebra::{DMatrix, Matrix3};

use crate::anisotropy::Anisotropy;
use crate::cluster::{Cluster, EnergyModel, Point};
use crate::dofs::DofMap;
use crate::error::{Error, Result};
use crate::geometry::{gather, integrated_orientation, orientation_vector, p1_gradients, xi_2d};

/// Sparse matrix in coordinate form; duplicate entries are summed.
#[derive(Clone, Debug, Default)]
pub struct SparseBlock {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseBlock {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, ..Default::default() }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        self.rows.push(r);
        self.cols.push(c);
        self.vals.push(v);
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for k in 0..self.vals.len() {
            m[(self.rows[k], self.cols[k])] += self.vals[k];
        }
        m
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for k in 0..self.vals.len() {
            y[self.rows[k]] += self.vals[k] * x[self.cols[k]];
        }
        y
    }

    /// `y = A^T x`.
    pub fn mul_t(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for k in 0..self.vals.len() {
            y[self.cols[k]] += self.vals[k] * x[self.rows[k]];
        }
        y
    }
}

#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub n_kappa: usize,
    pub n_x: usize,
    pub dt: f64,
    /// P1 stiffness for curvature, positive semidefinite.
    pub s_kappa: SparseBlock,
    /// Coupling `B[chi, eta] = <eta . nu^{m+1/2}, chi>^h`.
    pub b: SparseBlock,
    /// Stiffness acting on positions.
    pub s_x: SparseBlock,
    /// Right-hand side of the position rows, `f - S_X id`.
    pub rhs_x: Vec<f64>,
}

impl AssembledSystem {
    pub fn size(&self) -> usize {
        self.n_kappa + self.n_x
    }

    /// Coordinate entries of the full symmetric indefinite matrix. The order of
    /// entries depends only on the mesh and the dof map.
    pub fn full_matrix(&self) -> SparseBlock {
        let nk = self.n_kappa;
        let n = self.size();
        let mut m = SparseBlock::new(n, n);
        let cap = self.s_kappa.nnz() + 2 * self.b.nnz() + self.s_x.nnz();
        m.rows.reserve(cap);
        m.cols.reserve(cap);
        m.vals.reserve(cap);
        for k in 0..self.s_kappa.nnz() {
            m.push(self.s_kappa.rows[k], self.s_kappa.cols[k], -self.dt * self.s_kappa.vals[k]);
        }
        for k in 0..self.b.nnz() {
            m.push(self.b.rows[k], nk + self.b.cols[k], self.b.vals[k]);
            m.push(nk + self.b.cols[k], self.b.rows[k], self.b.vals[k]);
        }
        for k in 0..self.s_x.nnz() {
            m.push(nk + self.s_x.rows[k], nk + self.s_x.cols[k], self.s_x.vals[k]);
        }
        m
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.n_kappa];
        r.extend_from_slice(&self.rhs_x);
        r
    }
}

/// Stiffness blocks `(a, b)` of one element, as 3x3 matrices.
fn element_blocks(
    model: &EnergyModel,
    sigma: f64,
    old: &[Point],
    new: &[Point],
    grads: &[Point; 3],
    measure: f64,
    out: &mut [[Matrix3<f64>; 3]; 3],
) {
    let d = old.len();
    match model {
        EnergyModel::Isotropic => {
            for a in 0..d {
                for b in 0..d {
                    out[a][b] = Matrix3::identity() * (sigma * measure * grads[a].dot(&grads[b]));
                }
            }
        }
        EnergyModel::Anisotropic(an) => anisotropic_blocks(an, old, new, grads, out),
    }
}

fn anisotropic_blocks(an: &Anisotropy, old: &[Point], new: &[Point], grads: &[Point; 3], out: &mut [[Matrix3<f64>; 3]; 3]) {
    let d = old.len();
    let a_old = orientation_vector(old);
    let weights = an.weights(&orientation_vector(new));
    let fact = if d == 3 { 0.5 } else { 1.0 };
    for row in out.iter_mut().take(d) {
        for m in row.iter_mut().take(d) {
            *m = Matrix3::zeros();
        }
    }
    for l in 0..an.len() {
        let scale = weights[l] * an.gamma_l(l, &a_old) * fact;
        let t = an.tangent_basis(l, old);
        let mut proj = [[0.0; 2]; 3];
        for a in 0..d {
            for j in 0..d - 1 {
                proj[a][j] = grads[a].dot(&t[j]);
            }
        }
        let gt = an.gtilde()[l];
        for a in 0..d {
            for b in 0..d {
                let s: f64 = (0..d - 1).map(|j| proj[a][j] * proj[b][j]).sum();
                out[a][b] += gt * (scale * s);
            }
        }
    }
    if d == 2 {
        for a in 0..2 {
            for b in 0..2 {
                out[a][b][(2, 2)] = 0.0;
            }
        }
    }
}

/// Assemble the system on `cluster` (the current configuration) with lagged
/// positions `lagged` for the time-weighted normals and anisotropy weights.
pub fn assemble(cluster: &Cluster, dofs: &DofMap, lagged: &[Vec<Point>], dt: f64) -> Result<AssembledSystem> {
    let d = cluster.dim;
    let (nk, nx) = (dofs.n_kappa(), dofs.n_x());
    let mut s_kappa = SparseBlock::new(nk, nk);
    let mut b = SparseBlock::new(nk, nx);
    let mut s_x = SparseBlock::new(nx, nx);
    let mut rhs_x = vec![0.0; nx];
    let fact = if d == 3 { 0.5 } else { 1.0 };
    let model = &cluster.energy_model;
    let mut grads = [Point::zeros(); 3];
    let mut blocks = [[Matrix3::zeros(); 3]; 3];

    for (s, patch) in cluster.patches.iter().enumerate() {
        let x_old = &patch.vertices;
        let x_new = &lagged[s];
        for (e, simplex) in patch.simplices.iter().enumerate() {
            let (q0, _) = gather(x_old, simplex);
            let (q1, _) = gather(x_new, simplex);
            let (q0, q1) = (&q0[..d], &q1[..d]);
            let measure = p1_gradients(q0, &mut grads);
            if !(measure > 0.0) || !grads.iter().take(d).all(|g| g.iter().all(|x| x.is_finite())) {
                return Err(Error::DegenerateSimplex { surface: s, element: e, measure });
            }
            // |sigma^m| nu^{m+1/2} / d, the lumped weight per vertex.
            let bw = integrated_orientation(q0, q1) * (fact / d as f64);

            for a in 0..d {
                let ka = dofs.kappa_expansion(s, simplex[a]);
                for bb in 0..d {
                    let kb = dofs.kappa_expansion(s, simplex[bb]);
                    let val = measure * grads[a].dot(&grads[bb]);
                    for &(da, wa) in ka {
                        for &(db, wb) in kb {
                            s_kappa.push(da, db, wa * wb * val);
                        }
                    }
                }
                let (xa, ta) = dofs.x_dofs(s, simplex[a]);
                for &(da, wa) in ka {
                    for (c, t) in ta.iter().enumerate() {
                        b.push(da, xa + c, wa * bw.dot(t));
                    }
                }
            }

            element_blocks(model, patch.sigma, q0, q1, &grads, measure, &mut blocks);
            for a in 0..d {
                let (xa, ta) = dofs.x_dofs(s, simplex[a]);
                let mut load = Point::zeros();
                for bb in 0..d {
                    let (xb, tb) = dofs.x_dofs(s, simplex[bb]);
                    let m = &blocks[a][bb];
                    load += m * q0[bb];
                    for (ca, u) in ta.iter().enumerate() {
                        let mu = m.transpose() * u;
                        for (cb, w) in tb.iter().enumerate() {
                            s_x.push(xa + ca, xb + cb, mu.dot(w));
                        }
                    }
                }
                for (ca, u) in ta.iter().enumerate() {
                    rhs_x[xa + ca] -= load.dot(u);
                }
            }
        }
    }

    for (k, bl) in cluster.boundaries.iter().enumerate() {
        let rho = bl.contact_param;
        if rho == 0.0 {
            continue;
        }
        let s = bl.surface();
        let (x_old, x_new) = (&cluster.patches[s].vertices, &lagged[s]);
        let n = bl.plane_normal;
        if d == 2 {
            let v = bl.chain[0];
            let at_end = cluster.patches[s]
                .endpoint_is_end(v)
                .ok_or_else(|| Error::InvalidCluster(format!("boundary {k}: vertex {v} is not a curve endpoint")))?;
            let xi = xi_2d(&n, at_end);
            let (xa, ta) = dofs.x_dofs(s, v);
            for (c, t) in ta.iter().enumerate() {
                rhs_x[xa + c] += rho * xi.dot(t);
            }
        } else {
            for (u, v) in bl.segments() {
                let f0 = x_old[v] - x_old[u];
                let f1 = x_new[v] - x_new[u];
                // |f^m| xi^{m+1/2} times the half weight of each endpoint.
                let w = n.cross(&(f0 + f1)) * (0.25 * rho);
                for p in [u, v] {
                    let (xa, ta) = dofs.x_dofs(s, p);
                    for (c, t) in ta.iter().enumerate() {
                        rhs_x[xa + c] += w.dot(t);
                    }
                }
            }
        }
    }

    Ok(AssembledSystem { n_kappa: nk, n_x: nx, dt, s_kappa, b, s_x, rhs_x })
}
