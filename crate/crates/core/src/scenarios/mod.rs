//! Built-in initial configurations.

mod builder;
mod complex;
mod curves;

use serde::{Deserialize, Serialize};

use crate::cluster::Cluster;
use crate::error::{Error, Result};

pub use complex::{cylinder_3d, double_bubble_3d, drop_3d, plate_3d, quadruple_bubble_3d, sphere_3d, triple_bubble_3d};
pub use curves::{circle_2d, drop_2d, plate_2d, standard_bubble_2d};

#[derive(Clone, Copy, Debug)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub dim: usize,
    /// Vertex count used when `k` is not given.
    pub default_k: usize,
    pub description: &'static str,
}

const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo { name: "double_bubble_2d", dim: 2, default_k: 129, description: "two 2:1 semi-ellipses and a segment" },
    ScenarioInfo { name: "triple_bubble_2d", dim: 2, default_k: 1029, description: "inscribed triangle split into three parts" },
    ScenarioInfo { name: "quadruple_bubble_2d", dim: 2, default_k: 1029, description: "central triangle with three quadrilateral petals" },
    ScenarioInfo { name: "quintuple_bubble_2d", dim: 2, default_k: 1032, description: "central quadrilateral with four quadrilateral petals" },
    ScenarioInfo { name: "sextuple_bubble_2d", dim: 2, default_k: 1025, description: "central pentagon with five quadrilateral petals" },
    ScenarioInfo { name: "septuple_bubble_2d", dim: 2, default_k: 1032, description: "central hexagon with six quadrilateral petals" },
    ScenarioInfo { name: "drop_2d", dim: 2, default_k: 129, description: "semicircle on the line y = 0" },
    ScenarioInfo { name: "plate_2d", dim: 2, default_k: 33, description: "segment between the walls x = -1 and x = 1" },
    ScenarioInfo { name: "circle_2d", dim: 2, default_k: 128, description: "unit circle" },
    ScenarioInfo { name: "double_bubble_3d", dim: 3, default_k: 3267, description: "two hemispheres and the equatorial disk" },
    ScenarioInfo { name: "triple_bubble_3d", dim: 3, default_k: 6534, description: "unit ball cut into three wedges" },
    ScenarioInfo { name: "quadruple_bubble_3d", dim: 3, default_k: 8378, description: "unit ball cut into four tetrahedral cones" },
    ScenarioInfo { name: "drop_3d", dim: 3, default_k: 4225, description: "hemisphere on the plane z = 0" },
    ScenarioInfo { name: "cylinder_3d", dim: 3, default_k: 4802, description: "cube bubble with a flat film reaching the walls of [-3/2, 3/2]^2 x R" },
    ScenarioInfo { name: "plate_3d", dim: 3, default_k: 289, description: "flat square between the walls x, y = -1, 1" },
    ScenarioInfo { name: "sphere_3d", dim: 3, default_k: 1026, description: "unit sphere" },
];

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

/// Generator parameters shared by all scenarios.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    /// Requested total number of vertex copies.
    #[serde(default)]
    pub k: Option<usize>,
    /// Per-surface tensions; defaults to one.
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
}

/// Build a named scenario. Contact parameters start at zero.
pub fn build_scenario(name: &str, params: &ScenarioParams) -> Result<Cluster> {
    let info = SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario '{name}'")))?;
    let k = params.k.unwrap_or(info.default_k);
    let mut cluster = match name {
        "double_bubble_2d" => standard_bubble_2d(2, k)?,
        "triple_bubble_2d" => standard_bubble_2d(3, k)?,
        "quadruple_bubble_2d" => standard_bubble_2d(4, k)?,
        "quintuple_bubble_2d" => standard_bubble_2d(5, k)?,
        "sextuple_bubble_2d" => standard_bubble_2d(6, k)?,
        "septuple_bubble_2d" => standard_bubble_2d(7, k)?,
        "drop_2d" => drop_2d(k, 0.0)?,
        "plate_2d" => plate_2d(k)?,
        "circle_2d" => circle_2d(k, 1.0)?,
        "double_bubble_3d" => double_bubble_3d(k)?,
        "triple_bubble_3d" => triple_bubble_3d(k)?,
        "quadruple_bubble_3d" => quadruple_bubble_3d(k)?,
        "drop_3d" => drop_3d(k, 0.0)?,
        "cylinder_3d" => cylinder_3d(k, 0.0)?,
        "plate_3d" => plate_3d(k)?,
        "sphere_3d" => sphere_3d(k)?,
        _ => unreachable!(),
    };
    if let Some(sigma) = &params.sigma {
        cluster.set_sigmas(sigma)?;
    }
    Ok(cluster)
}

pub fn make_double_bubble_2d(k: usize) -> Result<Cluster> {
    standard_bubble_2d(2, k)
}

pub fn make_standard_bubble_2d(n_bubbles: usize, k: usize) -> Result<Cluster> {
    standard_bubble_2d(n_bubbles, k)
}

pub fn make_double_bubble_3d(k: usize) -> Result<Cluster> {
    double_bubble_3d(k)
}

pub fn make_triple_bubble_3d(k: usize) -> Result<Cluster> {
    triple_bubble_3d(k)
}

pub fn make_quadruple_bubble_3d(k: usize) -> Result<Cluster> {
    quadruple_bubble_3d(k)
}

/// Semicircle (`d = 2`) or hemisphere (`d = 3`) of radius one on a flat substrate.
pub fn make_drop_on_substrate(d: usize, k: usize, rho: f64) -> Result<Cluster> {
    match d {
        2 => drop_2d(k, rho),
        3 => drop_3d(k, rho),
        _ => Err(Error::Unsupported(format!("dimension {d}"))),
    }
}

pub fn make_cylinder_cluster(k: usize, rho: f64) -> Result<Cluster> {
    cylinder_3d(k, rho)
}
