//! Time stepping with Picard iteration on the time-weighted normals.

use crate::assembly::assemble;
use crate::cluster::{mesh_ratio, Cluster, Point, Positions, DEGENERATE_TOL};
use crate::diagnostics::{relative_volume_error, surface_energy, StepDiagnostics};
use crate::dofs::DofMap;
use crate::error::{Error, Result};
use crate::geometry::{contact_area_change_lemma, region_volumes, simplex_measure_at};
use crate::linalg::{LinearSolver, LinearSolverKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Structure-preserving: iterate to a fixed point of the nonlinear scheme.
    #[default]
    Sp,
    /// Linear scheme: a single iteration with the old normals.
    Bgn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub mode: Mode,
    /// Absolute tolerance on the maximal vertex displacement between iterates.
    pub picard_tol: f64,
    pub picard_max: usize,
    pub linear_solver: LinearSolverKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 1e-3, mode: Mode::Sp, picard_tol: 1e-10, picard_max: 100, linear_solver: LinearSolverKind::Direct }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::Config("picard tolerance must be positive".into()));
        }
        if self.picard_max == 0 {
            return Err(Error::Config("picard max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one accepted time step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub diagnostics: StepDiagnostics,
    /// Curvature at every vertex copy.
    pub kappa: Vec<Vec<f64>>,
    /// Displacement between the last two Picard iterates.
    pub picard_residual: f64,
    /// Backward error of the final linear solve.
    pub linear_residual: f64,
}

pub struct Simulation {
    cluster: Cluster,
    config: SolverConfig,
    dofs: DofMap,
    constants: Vec<Vec<f64>>,
    solver: LinearSolver,
    steps: usize,
    initial_volumes: Vec<f64>,
    contact_energy: f64,
    wetted_change: Vec<f64>,
}

fn check_degenerate(cluster: &Cluster, pos: &[Vec<Point>]) -> Result<()> {
    let d = cluster.dim;
    let diam = cluster.bbox_diameter(pos);
    let tol = DEGENERATE_TOL * diam.powi(d as i32 - 1);
    for (s, patch) in cluster.patches.iter().enumerate() {
        for (e, simplex) in patch.simplices.iter().enumerate() {
            let m = simplex_measure_at(&pos[s], simplex);
            if !(m >= tol) || m == 0.0 {
                return Err(Error::DegenerateSimplex { surface: s, element: e, measure: m });
            }
        }
    }
    Ok(())
}

fn max_distance(a: &[Vec<Point>], b: &[Vec<Point>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

impl Simulation {
    pub fn new(cluster: Cluster, config: SolverConfig) -> Result<Self> {
        config.check()?;
        check_degenerate(&cluster, &cluster.positions())?;
        let dofs = DofMap::new(&cluster)?;
        let constants = dofs.kappa_constants(&cluster);
        let initial_volumes = region_volumes(&cluster, &cluster.positions())?;
        let solver = LinearSolver::new(config.linear_solver);
        let nb = cluster.boundaries.len();
        Ok(Self {
            cluster,
            config,
            dofs,
            constants,
            solver,
            steps: 0,
            initial_volumes,
            contact_energy: 0.0,
            wetted_change: vec![0.0; nb],
        })
    }

    pub fn cluster(&self) -> &Cluster {
        &self.cluster
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn initial_volumes(&self) -> &[f64] {
        &self.initial_volumes
    }

    /// Cumulative change of `|G_k^-|` for every boundary line.
    pub fn wetted_change(&self) -> &[f64] {
        &self.wetted_change
    }

    /// Diagnostics of the current configuration.
    pub fn diagnostics(&self, picard_iters: usize, max_displacement: f64) -> Result<StepDiagnostics> {
        let pos = self.cluster.positions();
        let es = surface_energy(&self.cluster, &pos);
        let volumes = region_volumes(&self.cluster, &pos)?;
        let v_delta = if volumes.is_empty() { 0.0 } else { relative_volume_error(&volumes, &self.initial_volumes)? };
        Ok(StepDiagnostics {
            t: self.time(),
            energy_surface: es,
            energy_contact: self.contact_energy,
            energy_total: es + self.contact_energy,
            volumes,
            v_delta,
            mesh_ratio: mesh_ratio(&self.cluster, &pos)?,
            picard_iters,
            max_displacement,
        })
    }

    /// Solve for the next configuration without accepting it.
    pub fn solve_step(&mut self) -> Result<(Positions, Vec<Vec<f64>>, usize, f64)> {
        let old = self.cluster.positions();
        let mut lagged = old.clone();
        let cfg = &self.config;
        let mut kappa = Vec::new();
        let mut residual = f64::INFINITY;
        let mut iters = 0;
        let mut converged = false;
        for p in 0..cfg.picard_max {
            let sys = assemble(&self.cluster, &self.dofs, &lagged, cfg.dt)?;
            let (k, dx) = self.solver.solve_reusing(&sys, &self.constants, p == 0)?;
            let next = self.dofs.displaced(&old, &dx);
            residual = max_distance(&next, &lagged);
            lagged = next;
            kappa = k;
            iters = p + 1;
            if cfg.mode == Mode::Bgn {
                break;
            }
            if residual < cfg.picard_tol {
                converged = true;
                break;
            }
        }
        if cfg.mode == Mode::Sp && !converged && cfg.picard_max > 1 {
            return Err(Error::PicardNotConverged { iterations: iters, displacement: residual, tolerance: cfg.picard_tol });
        }
        Ok((lagged, self.dofs.expand_kappa(&kappa), iters, residual))
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let old = self.cluster.positions();
        let (new, kappa, iters, residual) = self.solve_step()?;
        check_degenerate(&self.cluster, &new)?;
        for k in 0..self.cluster.boundaries.len() {
            let (plus, minus) = contact_area_change_lemma(&self.cluster, &old, &new, k)?;
            self.contact_energy += self.cluster.boundaries[k].contact_param * plus;
            self.wetted_change[k] += minus;
        }
        let disp = max_distance(&new, &old);
        self.cluster.set_positions(&new);
        self.steps += 1;
        let diagnostics = self.diagnostics(iters, disp)?;
        Ok(StepOutcome { diagnostics, kappa, picard_residual: residual, linear_residual: self.solver.last_backward_error })
    }

    /// Number of steps needed to reach `t_final` from the current time.
    pub fn steps_until(&self, t_final: f64) -> Result<usize> {
        let dt = self.config.dt;
        let remaining = t_final - self.time();
        let m = (remaining / dt).round();
        if m < 0.0 || (m * dt - remaining).abs() > 1e-9 * t_final.abs().max(dt) {
            return Err(Error::Config(format!("T_final = {t_final} is not a multiple of dt = {dt} past t = {}", self.time())));
        }
        Ok(m as usize)
    }

    /// Step until `t_final`, calling `observer` after every step.
    pub fn run<F>(&mut self, t_final: f64, mut observer: F) -> Result<Vec<StepDiagnostics>>
    where
        F: FnMut(&Simulation, &StepOutcome) -> Result<()>,
    {
        let m = self.steps_until(t_final)?;
        let mut out = Vec::with_capacity(m);
        for _ in 0..m {
            let outcome = self.step()?;
            observer(self, &outcome)?;
            out.push(outcome.diagnostics);
        }
        Ok(out)
    }
}
