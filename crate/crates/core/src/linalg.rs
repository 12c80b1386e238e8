//! Linear solvers for the assembled saddle-point system.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};

use crate::assembly::{AssembledSystem, SparseBlock};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LinearSolverKind {
    /// Sparse LU of the full system.
    #[default]
    Direct,
    /// Eliminate curvature and solve for the displacement with projected
    /// conjugate gradients.
    SchurCg,
}

struct Pattern {
    rows: Vec<usize>,
    cols: Vec<usize>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: SymbolicLu<usize>,
}

/// Sparse LU that keeps the symbolic factorization while the sparsity pattern
/// (the exact sequence of coordinate entries) stays the same.
#[derive(Default)]
pub struct DirectSolver {
    pattern: Option<Pattern>,
    /// Factorization kept for [`DirectSolver::solve_reusing`].
    frozen: Option<Lu<usize, f64>>,
    pub refinement_steps: usize,
    /// Row blocks measured separately by the refinement stopping test.
    pub row_blocks: Vec<usize>,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl DirectSolver {
    pub fn new() -> Self {
        Self { pattern: None, frozen: None, refinement_steps: 5, row_blocks: Vec::new() }
    }

    fn pattern_for(&mut self, m: &SparseBlock) -> Result<&Pattern> {
        let reuse = matches!(&self.pattern, Some(p) if p.rows == m.rows && p.cols == m.cols && p.symbolic.nrows() == m.nrows);
        if !reuse {
            let idx: Vec<Pair<usize, usize>> =
                m.rows.iter().zip(&m.cols).map(|(&row, &col)| Pair { row, col }).collect();
            let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(m.nrows, m.ncols, &idx)
                .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
            let lu = SymbolicLu::try_new(symbolic.as_ref()).map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
            self.pattern = Some(Pattern { rows: m.rows.clone(), cols: m.cols.clone(), symbolic, argsort, lu });
        }
        Ok(self.pattern.as_ref().unwrap())
    }

    /// Numerically factor `m`, reusing the symbolic analysis when possible.
    pub fn factor<'a>(&mut self, m: &'a SparseBlock) -> Result<Factorization<'a>> {
        let steps = self.refinement_steps;
        let blocks = self.row_blocks.clone();
        let pat = self.pattern_for(m)?;
        let mat = SparseColMat::new_from_argsort(pat.symbolic.clone(), &pat.argsort, &m.vals)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let lu = Lu::try_new_with_symbolic(pat.lu.clone(), mat.as_ref())
            .map_err(|e| Error::LinearSolver(format!("factorization failed: {e:?}")))?;
        Ok(Factorization { lu, matrix: m, refinement_steps: steps, row_blocks: blocks })
    }

    /// Solve `m x = rhs`.
    pub fn solve(&mut self, m: &SparseBlock, rhs: &[f64]) -> Result<Vec<f64>> {
        self.factor(m)?.solve(rhs)
    }

    /// Solve `m x = rhs` using the factorization of an earlier, nearby matrix
    /// as a preconditioner for iterative refinement. A fresh factorization is
    /// computed when `refresh` is set, when none is stored, or when the
    /// refinement stalls.
    pub fn solve_reusing(&mut self, m: &SparseBlock, rhs: &[f64], refresh: bool) -> Result<Vec<f64>> {
        if !refresh {
            if let Some(lu) = &self.frozen {
                if let Some(x) = refine_with(lu, m, rhs, &self.row_blocks, REUSE_MAX_ITER) {
                    return Ok(x);
                }
            }
        }
        let f = self.factor(m)?;
        let x = f.solve(rhs)?;
        self.frozen = Some(f.lu);
        Ok(x)
    }
}

const REUSE_MAX_ITER: usize = 60;

fn lu_apply(lu: &Lu<usize, f64>, r: &[f64]) -> Vec<f64> {
    let mut b = Mat::from_fn(r.len(), 1, |i, _| r[i]);
    lu.solve_in_place(b.as_mut());
    (0..r.len()).map(|i| b[(i, 0)]).collect()
}

fn row_abs_max(m: &SparseBlock) -> f64 {
    let mut rows = vec![0.0; m.nrows];
    for k in 0..m.nnz() {
        rows[m.rows[k]] += m.vals[k].abs();
    }
    max_abs(&rows)
}

/// Normwise backward error `|b - m x| / (|m| |x| + |b|)` in the max norm.
pub fn backward_error(m: &SparseBlock, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = m.mul(x);
    let r = rhs.iter().zip(&ax).map(|(b, a)| (b - a).abs()).fold(0.0, f64::max);
    let scale = row_abs_max(m) * max_abs(x) + max_abs(rhs);
    if scale == 0.0 {
        0.0
    } else {
        r / scale
    }
}

/// Residual `rhs - m x` and the blockwise backward error: the normwise error
/// `max |r_i| / max (|m| |x| + |b|)_i` taken over each row block separately,
/// maximized over blocks. `blocks` holds the first row of every block after
/// the first.
fn residual(m: &SparseBlock, x: &[f64], rhs: &[f64], blocks: &[usize]) -> (Vec<f64>, f64) {
    let ax = m.mul(x);
    let mut scale: Vec<f64> = rhs.iter().map(|b| b.abs()).collect();
    for k in 0..m.nnz() {
        scale[m.rows[k]] += (m.vals[k] * x[m.cols[k]]).abs();
    }
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut w: f64 = 0.0;
    let mut start = 0;
    for end in blocks.iter().copied().chain([r.len()]) {
        let s = max_abs(&scale[start..end]);
        if s > 0.0 {
            w = w.max(max_abs(&r[start..end]) / s);
        }
        start = end;
    }
    (r, w)
}

/// Iterative refinement of `m x = rhs` preconditioned by `lu`; `None` if it stalls.
fn refine_with(lu: &Lu<usize, f64>, m: &SparseBlock, rhs: &[f64], blocks: &[usize], max_iter: usize) -> Option<Vec<f64>> {
    let mut x = lu_apply(lu, rhs);
    let mut prev = f64::INFINITY;
    for _ in 0..max_iter {
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let (r, w) = residual(m, &x, rhs, blocks);
        if w <= REUSE_TOL {
            return Some(x);
        }
        if w > 0.5 * prev {
            return None;
        }
        prev = w;
        let dx = lu_apply(lu, &r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    None
}

/// Blockwise backward error accepted from refinement with a reused
/// factorization.
const REUSE_TOL: f64 = 1e-15;

pub struct Factorization<'a> {
    lu: Lu<usize, f64>,
    matrix: &'a SparseBlock,
    refinement_steps: usize,
    row_blocks: Vec<usize>,
}

impl Factorization<'_> {
    /// Solve with a few steps of iterative refinement.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut b = Mat::from_fn(n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(b.as_mut());
        let mut x: Vec<f64> = (0..n).map(|i| b[(i, 0)]).collect();
        let mut prev = f64::INFINITY;
        for _ in 0..self.refinement_steps {
            if x.iter().any(|v| !v.is_finite()) {
                break;
            }
            let (r, w) = residual(self.matrix, &x, rhs, &self.row_blocks);
            if w <= 2.0 * f64::EPSILON || w > 0.5 * prev {
                break;
            }
            prev = w;
            let mut rb = Mat::from_fn(n, 1, |i, _| r[i]);
            self.lu.solve_in_place(rb.as_mut());
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += rb[(i, 0)];
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinearSolver("singular system".into()));
        }
        Ok(x)
    }
}

/// Solver state kept across Picard iterations and time steps.
pub struct LinearSolver {
    kind: LinearSolverKind,
    direct: DirectSolver,
    kappa: DirectSolver,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Backward error of the most recent solve.
    pub last_backward_error: f64,
}

impl LinearSolver {
    pub fn new(kind: LinearSolverKind) -> Self {
        Self { kind, direct: DirectSolver::new(), kappa: DirectSolver::new(), cg_tol: 1e-13, cg_max_iter: 0, last_backward_error: 0.0 }
    }

    pub fn kind(&self) -> LinearSolverKind {
        self.kind
    }

    /// Solve the system; returns `(kappa, dX)` in reduced coordinates.
    /// `constants` spans the null space of the curvature stiffness.
    pub fn solve(&mut self, sys: &AssembledSystem, constants: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.solve_reusing(sys, constants, true)
    }

    /// As [`LinearSolver::solve`]; unless `refresh` is set, the direct solver
    /// may precondition with the factorization from its previous call.
    pub fn solve_reusing(&mut self, sys: &AssembledSystem, constants: &[Vec<f64>], refresh: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        match self.kind {
            LinearSolverKind::Direct => {
                let m = sys.full_matrix();
                let rhs = sys.rhs();
                self.direct.row_blocks = vec![sys.n_kappa];
                let x = self.direct.solve_reusing(&m, &rhs, refresh)?;
                self.last_backward_error = backward_error(&m, &x, &rhs);
                let (k, dx) = x.split_at(sys.n_kappa);
                Ok((k.to_vec(), dx.to_vec()))
            }
            LinearSolverKind::SchurCg => {
                let (k, dx) = self.solve_schur(sys, constants)?;
                let x: Vec<f64> = k.iter().chain(&dx).copied().collect();
                self.last_backward_error = backward_error(&sys.full_matrix(), &x, &sys.rhs());
                Ok((k, dx))
            }
        }
    }

    fn solve_schur(&mut self, sys: &AssembledSystem, z: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (nk, nx) = (sys.n_kappa, sys.n_x);
        // Pin one curvature dof per null vector so the remaining stiffness is
        // nonsingular.
        let mut zc: Vec<Vec<f64>> = z.to_vec();
        let mut pinned = Vec::new();
        for j in 0..zc.len() {
            let (i, v) = (0..nk)
                .filter(|i| !pinned.contains(i))
                .map(|i| (i, zc[j][i].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::LinearSolver("no curvature dofs".into()))?;
            if v < 1e-12 {
                return Err(Error::LinearSolver("dependent curvature null vectors".into()));
            }
            pinned.push(i);
            for j2 in j + 1..zc.len() {
                let f = zc[j2][i] / zc[j][i];
                let src = zc[j].clone();
                for (a, b) in zc[j2].iter_mut().zip(&src) {
                    *a -= f * b;
                }
            }
        }
        let mut is_pinned = vec![false; nk];
        for &i in &pinned {
            is_pinned[i] = true;
        }
        let mut sk = SparseBlock::new(nk, nk);
        for k in 0..sys.s_kappa.nnz() {
            let (r, c) = (sys.s_kappa.rows[k], sys.s_kappa.cols[k]);
            if !is_pinned[r] && !is_pinned[c] {
                sk.push(r, c, sys.s_kappa.vals[k]);
            }
        }
        for &i in &pinned {
            sk.push(i, i, 1.0);
        }
        let kfac = self.kappa.factor(&sk)?;
        let pinv = |r: &[f64]| -> Result<Vec<f64>> {
            let mut r = r.to_vec();
            for &i in &pinned {
                r[i] = 0.0;
            }
            let mut y = kfac.solve(&r)?;
            for &i in &pinned {
                y[i] = 0.0;
            }
            Ok(y)
        };
        let dt = sys.dt;
        let apply_t = |v: &[f64]| -> Result<Vec<f64>> {
            let y = pinv(&sys.b.mul(v))?;
            let corr = sys.b.mul_t(&y);
            let mut out = sys.s_x.mul(v);
            for (o, c) in out.iter_mut().zip(&corr) {
                *o += c / dt;
            }
            Ok(out)
        };

        // Constraint rows C = Z^T B and the projector onto null(C).
        let crow: Vec<Vec<f64>> = z.iter().map(|zj| sys.b.mul_t(zj)).collect();
        let r = crow.len();
        let gram = nalgebra::DMatrix::from_fn(r, r, |i, j| dot(&crow[i], &crow[j]));
        let gram_inv = if r > 0 {
            gram.clone()
                .try_inverse()
                .ok_or_else(|| Error::LinearSolver("rank-deficient volume constraints".into()))?
        } else {
            gram.clone()
        };
        let project = |v: &mut Vec<f64>| {
            if r == 0 {
                return;
            }
            let cv = nalgebra::DVector::from_fn(r, |i, _| dot(&crow[i], v));
            let lam = &gram_inv * cv;
            for (i, row) in crow.iter().enumerate() {
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= lam[i] * b;
                }
            }
        };
        let mut diag = vec![0.0; nx];
        for k in 0..sys.s_x.nnz() {
            if sys.s_x.rows[k] == sys.s_x.cols[k] {
                diag[sys.s_x.rows[k]] += sys.s_x.vals[k];
            }
        }
        let dscale = max_abs(&diag).max(f64::MIN_POSITIVE);
        let precond = |v: &[f64]| -> Vec<f64> {
            v.iter().zip(&diag).map(|(x, d)| x / d.max(1e-12 * dscale)).collect()
        };

        let g = &sys.rhs_x;
        let mut x = vec![0.0; nx];
        let mut res = g.clone();
        project(&mut res);
        let gnorm = norm(&res).max(f64::MIN_POSITIVE);
        let mut zv = precond(&res);
        project(&mut zv);
        let mut p = zv.clone();
        let mut rz = dot(&res, &zv);
        let max_iter = if self.cg_max_iter == 0 { 20 * nx + 100 } else { self.cg_max_iter };
        let mut converged = norm(&res) <= self.cg_tol * gnorm;
        let mut it = 0;
        while !converged && it < max_iter {
            let mut tp = apply_t(&p)?;
            project(&mut tp);
            let alpha = rz / dot(&p, &tp);
            for i in 0..nx {
                x[i] += alpha * p[i];
                res[i] -= alpha * tp[i];
            }
            if norm(&res) <= self.cg_tol * gnorm {
                converged = true;
                break;
            }
            zv = precond(&res);
            project(&mut zv);
            let rz_new = dot(&res, &zv);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..nx {
                p[i] = zv[i] + beta * p[i];
            }
            it += 1;
        }
        if !converged {
            return Err(Error::LinearSolver(format!("Schur CG did not converge in {max_iter} iterations")));
        }
        // Multipliers: C C^T c = C (g - T x).
        let tx = apply_t(&x)?;
        let resid: Vec<f64> = g.iter().zip(&tx).map(|(a, b)| a - b).collect();
        let cvec = nalgebra::DVector::from_fn(r, |i, _| dot(&crow[i], &resid));
        let c = if r > 0 { &gram_inv * cvec } else { cvec };
        let mut kappa = pinv(&sys.b.mul(&x))?;
        for k in kappa.iter_mut() {
            *k /= dt;
        }
        for (j, zj) in z.iter().enumerate() {
            for (k, zz) in kappa.iter_mut().zip(zj) {
                *k += c[j] * zz;
            }
        }
        Ok((kappa, x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
