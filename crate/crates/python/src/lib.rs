use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spfem::io::{cluster_from_json, cluster_to_json, RunConfig};
use spfem::scenarios::{build_scenario, list_scenarios, ScenarioParams};
use spfem::{Mode, SolverConfig, StepDiagnostics};

fn to_py(e: spfem::Error) -> PyErr {
    if e.is_solver_failure() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn diagnostics_dict<'py>(py: Python<'py>, d: &StepDiagnostics) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("t", d.t)?;
    out.set_item("energy_surface", d.energy_surface)?;
    out.set_item("energy_contact", d.energy_contact)?;
    out.set_item("energy_total", d.energy_total)?;
    out.set_item("volumes", d.volumes.clone())?;
    out.set_item("v_delta", d.v_delta)?;
    out.set_item("mesh_ratio", d.mesh_ratio)?;
    out.set_item("picard_iters", d.picard_iters)?;
    out.set_item("max_displacement", d.max_displacement)?;
    Ok(out)
}

/// `(name, dim, default_k, description)` for every built-in scenario.
#[pyfunction]
fn scenarios() -> Vec<(&'static str, usize, usize, &'static str)> {
    list_scenarios().iter().map(|s| (s.name, s.dim, s.default_k, s.description)).collect()
}

/// Build a scenario and return it as a cluster JSON document.
#[pyfunction]
#[pyo3(signature = (name, k=None, sigma=None, rho=None))]
fn make_scenario(name: &str, k: Option<usize>, sigma: Option<Vec<f64>>, rho: Option<f64>) -> PyResult<String> {
    let mut c = build_scenario(name, &ScenarioParams { k, sigma }).map_err(to_py)?;
    if let Some(rho) = rho {
        for b in &mut c.boundaries {
            b.contact_param = rho;
        }
    }
    cluster_to_json(&c).map_err(to_py)
}

/// Validation messages for a cluster document; empty when valid.
#[pyfunction]
fn validate(cluster_json: &str) -> PyResult<Vec<String>> {
    let c = cluster_from_json(cluster_json).map_err(to_py)?;
    Ok(spfem::validate(&c).violations.into_iter().map(|v| v.message).collect())
}

/// Execute a run configuration, as `spfem run` does.
#[pyfunction]
#[pyo3(signature = (config_json, base_dir="."))]
fn run_config<'py>(py: Python<'py>, config_json: &str, base_dir: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = RunConfig::from_json(config_json).map_err(to_py)?;
    let sum = spfem::runner::execute(&cfg, Path::new(base_dir)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("steps", sum.steps)?;
    out.set_item("csv", sum.csv.to_string_lossy().into_owned())?;
    out.set_item("frames", sum.frames.iter().map(|p| p.to_string_lossy().into_owned()).collect::<Vec<_>>())?;
    out.set_item("last", diagnostics_dict(py, &sum.last)?)?;
    Ok(out)
}

#[pyclass(unsendable)]
struct Simulation {
    inner: spfem::Simulation,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (cluster_json, dt, mode="sp", picard_tol=1e-10, picard_max=100))]
    fn new(cluster_json: &str, dt: f64, mode: &str, picard_tol: f64, picard_max: usize) -> PyResult<Self> {
        let mode = match mode {
            "sp" => Mode::Sp,
            "bgn" => Mode::Bgn,
            other => return Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
        };
        let c = cluster_from_json(cluster_json).map_err(to_py)?;
        let report = spfem::validate(&c);
        if !report.is_ok() {
            return Err(PyValueError::new_err(report.to_string()));
        }
        let cfg = SolverConfig { dt, mode, picard_tol, picard_max, ..Default::default() };
        Ok(Self { inner: spfem::Simulation::new(c, cfg).map_err(to_py)? })
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.cluster().dim
    }

    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        diagnostics_dict(py, &self.inner.diagnostics(0, 0.0).map_err(to_py)?)
    }

    /// Advance one step and return its diagnostics.
    fn step<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = self.inner.step().map_err(to_py)?;
        diagnostics_dict(py, &out.diagnostics)
    }

    /// Step until `t_final`; one diagnostics dict per step.
    fn run<'py>(&mut self, py: Python<'py>, t_final: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let steps = self.inner.run(t_final, |_, _| Ok(())).map_err(to_py)?;
        steps.iter().map(|d| diagnostics_dict(py, d)).collect()
    }

    /// Vertex coordinates per surface, `dim` components each.
    fn positions(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.inner.cluster().dim;
        self.inner
            .cluster()
            .patches
            .iter()
            .map(|p| p.vertices.iter().map(|x| x.iter().take(d).copied().collect()).collect())
            .collect()
    }

    /// Cumulative wetted-area change per boundary line.
    fn wetted_change(&self) -> Vec<f64> {
        self.inner.wetted_change().to_vec()
    }

    /// Junction angles (three per junction entry) and contact angles, in degrees.
    fn angles<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.inner.cluster();
        let rep = spfem::geometry::measure_angles(c, &c.positions()).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("junction", rep.junctions.iter().map(|j| j.angles_deg.to_vec()).collect::<Vec<_>>())?;
        out.set_item("contact", rep.contacts.iter().map(|a| a.angle_deg).collect::<Vec<_>>())?;
        Ok(out)
    }

    fn cluster_json(&self) -> PyResult<String> {
        cluster_to_json(self.inner.cluster()).map_err(to_py)
    }
}

#[pymodule]
fn pyspfem(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(make_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_class::<Simulation>()?;
    Ok(())
}
