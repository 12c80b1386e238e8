//! Execute a run configuration: simulate, write diagnostics and frames.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::diagnostics::{CsvWriter, StepDiagnostics};
use crate::error::{Error, Result};
use crate::io::{write_frame, RunConfig};
use crate::solver::Simulation;
use crate::validate::validate;

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub csv: PathBuf,
    pub frames: Vec<PathBuf>,
    pub last: StepDiagnostics,
}

fn frame_path(dir: &Path, index: usize, t: f64, dim: usize) -> PathBuf {
    let ext = if dim == 2 { "csv" } else { "obj" };
    dir.join(format!("frame_{index:03}_t{t}.{ext}"))
}

/// Run `config`; relative paths resolve against `base`.
pub fn execute(config: &RunConfig, base: &Path) -> Result<RunSummary> {
    let cluster = config.initial_cluster(base)?;
    let report = validate(&cluster);
    if !report.is_ok() {
        return Err(Error::InvalidCluster(report.to_string()));
    }
    let dim = cluster.dim;
    let regions = cluster.regions.len();
    let mut sim = Simulation::new(cluster, config.solver_config())?;
    let steps = sim.steps_until(config.t_final)?;
    let dt = config.dt;
    let mut frame_steps = Vec::with_capacity(config.output.frames.len());
    for &t in &config.output.frames {
        let m = (t / dt).round();
        if !(t >= 0.0) || (m * dt - t).abs() > 1e-9 * t.max(dt) || m as usize > steps {
            return Err(Error::Config(format!("frame time {t} is not a multiple of dt = {dt} within [0, T_final]")));
        }
        frame_steps.push(m as usize);
    }

    let dir = base.join(&config.output.dir);
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join(&config.output.csv);
    let mut csv = CsvWriter::new(BufWriter::new(fs::File::create(&csv_path)?), regions)?;
    let mut frames = Vec::new();
    let mut write_frames = |sim: &Simulation, step: usize| -> Result<()> {
        for (i, _) in frame_steps.iter().enumerate().filter(|(_, &s)| s == step) {
            let p = frame_path(&dir, i, config.output.frames[i], dim);
            write_frame(sim.cluster(), &p)?;
            log::info!("frame {} at t = {}", p.display(), sim.time());
            frames.push(p);
        }
        Ok(())
    };

    let initial = sim.diagnostics(0, 0.0)?;
    csv.write(&initial)?;
    write_frames(&sim, 0)?;
    let mut last = initial;
    for step in 1..=steps {
        let outcome = sim.step()?;
        csv.write(&outcome.diagnostics)?;
        write_frames(&sim, step)?;
        log::debug!(
            "t = {:.6} E = {:.12} v_delta = {:.3e} picard = {}",
            outcome.diagnostics.t,
            outcome.diagnostics.energy_total,
            outcome.diagnostics.v_delta,
            outcome.diagnostics.picard_iters
        );
        last = outcome.diagnostics;
    }
    csv.flush()?;
    frames.sort();
    Ok(RunSummary { steps, csv: csv_path, frames, last })
}
