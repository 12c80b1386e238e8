//! File formats: cluster JSON, run configuration, frames.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::anisotropy::{Anisotropy, AnisotropyKind};
use crate::cluster::{BoundaryLine, Cluster, EnergyModel, Point, Region, SurfacePatch, TripleJunction};
use crate::diagnostics::fmt_f64;
use crate::error::{Error, Result};
use crate::linalg::LinearSolverKind;
use crate::scenarios::ScenarioParams;
use crate::solver::{Mode, SolverConfig};

/// JSON formatter writing every float with 17 significant digits.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialize with [`Sig17`] floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Energy model as written in cluster files and run configs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnergyConfig {
    /// Per-surface `sigma` from the patches.
    #[default]
    Isotropic,
    Cusp {
        eps: f64,
        #[serde(default = "one")]
        r: f64,
    },
    Rotation2d {
        #[serde(rename = "L")]
        l: usize,
        eps: f64,
    },
    /// Explicit `d x d` matrices `G_l`.
    Matrices {
        matrices: Vec<Vec<Vec<f64>>>,
        #[serde(default = "one")]
        r: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl EnergyConfig {
    pub fn to_model(&self, dim: usize) -> Result<EnergyModel> {
        Ok(match self {
            EnergyConfig::Isotropic => EnergyModel::Isotropic,
            EnergyConfig::Cusp { eps, r } => EnergyModel::Anisotropic(Anisotropy::cusp(dim, *r, *eps)?),
            EnergyConfig::Rotation2d { l, eps } => {
                if dim != 2 {
                    return Err(Error::InvalidAnisotropy("rotation2d is only defined in 2D".into()));
                }
                EnergyModel::Anisotropic(Anisotropy::rotation_2d(*l, *eps)?)
            }
            EnergyConfig::Matrices { matrices, r } => {
                let mats = matrices
                    .iter()
                    .enumerate()
                    .map(|(l, m)| {
                        if m.len() != dim || m.iter().any(|row| row.len() != dim) {
                            return Err(Error::InvalidAnisotropy(format!("G_{l} must be {dim}x{dim}")));
                        }
                        let mut g = Matrix3::identity();
                        for i in 0..dim {
                            for j in 0..dim {
                                g[(i, j)] = m[i][j];
                            }
                        }
                        Ok(g)
                    })
                    .collect::<Result<Vec<_>>>()?;
                EnergyModel::Anisotropic(Anisotropy::from_matrices(dim, mats, *r)?)
            }
        })
    }

    pub fn from_model(model: &EnergyModel) -> Self {
        match model {
            EnergyModel::Isotropic => EnergyConfig::Isotropic,
            EnergyModel::Anisotropic(a) => match a.kind() {
                AnisotropyKind::Cusp { eps } => EnergyConfig::Cusp { eps: *eps, r: a.exponent() },
                AnisotropyKind::Rotation2d { l, eps } => EnergyConfig::Rotation2d { l: *l, eps: *eps },
                AnisotropyKind::Isotropic | AnisotropyKind::Matrices => {
                    let d = a.dim();
                    let matrices = a.matrices().iter().map(|g| (0..d).map(|i| (0..d).map(|j| g[(i, j)]).collect()).collect()).collect();
                    EnergyConfig::Matrices { matrices, r: a.exponent() }
                }
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatchFile {
    surface_id: usize,
    dim: usize,
    vertices: Vec<Vec<f64>>,
    simplices: Vec<Vec<usize>>,
    #[serde(default = "one")]
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JunctionFile {
    tj_id: usize,
    incident: [(usize, usize); 3],
    orientation: [i8; 3],
    correspondence: [Vec<usize>; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryFile {
    bl_id: usize,
    incident: (usize, usize),
    plane_point: Vec<f64>,
    plane_normal: Vec<f64>,
    #[serde(default)]
    contact_param: f64,
    chain: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionFile {
    region_id: usize,
    surface_set: Vec<usize>,
    orientation: Vec<i8>,
    #[serde(default)]
    plane_set: Vec<usize>,
    reference_point: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterFile {
    #[serde(default)]
    dim: Option<usize>,
    patches: Vec<PatchFile>,
    #[serde(default)]
    junctions: Vec<JunctionFile>,
    #[serde(default)]
    boundaries: Vec<BoundaryFile>,
    #[serde(default)]
    regions: Vec<RegionFile>,
    #[serde(default)]
    energy_model: EnergyConfig,
}

fn coords(p: &Point, d: usize) -> Vec<f64> {
    p.iter().take(d).copied().collect()
}

fn point(v: &[f64], d: usize, what: &str) -> Result<Point> {
    if v.len() != d {
        return Err(Error::InvalidCluster(format!("{what}: expected {d} coordinates, got {}", v.len())));
    }
    Ok(Point::new(v[0], v[1], if d == 3 { v[2] } else { 0.0 }))
}

pub fn cluster_to_json(c: &Cluster) -> Result<String> {
    let d = c.dim;
    let file = ClusterFile {
        dim: Some(d),
        patches: c
            .patches
            .iter()
            .map(|p| PatchFile {
                surface_id: p.surface_id,
                dim: p.dim,
                vertices: p.vertices.iter().map(|x| coords(x, d)).collect(),
                simplices: p.simplices.clone(),
                sigma: p.sigma,
            })
            .collect(),
        junctions: c
            .junctions
            .iter()
            .map(|j| JunctionFile {
                tj_id: j.tj_id,
                incident: j.incident,
                orientation: j.orientation,
                correspondence: j.correspondence.clone(),
            })
            .collect(),
        boundaries: c
            .boundaries
            .iter()
            .map(|b| BoundaryFile {
                bl_id: b.bl_id,
                incident: b.incident,
                plane_point: coords(&b.plane_point, d),
                plane_normal: coords(&b.plane_normal, d),
                contact_param: b.contact_param,
                chain: b.chain.clone(),
            })
            .collect(),
        regions: c
            .regions
            .iter()
            .map(|r| RegionFile {
                region_id: r.region_id,
                surface_set: r.surface_set.clone(),
                orientation: r.orientation.clone(),
                plane_set: r.plane_set.clone(),
                reference_point: coords(&r.reference_point, d),
            })
            .collect(),
        energy_model: EnergyConfig::from_model(&c.energy_model),
    };
    to_json_string(&file)
}

/// Parse a cluster document. Structural checks only; see [`crate::validate`].
pub fn cluster_from_json(s: &str) -> Result<Cluster> {
    let f: ClusterFile = serde_json::from_str(s)?;
    let d = match f.dim {
        Some(d) => d,
        None => f.patches.first().map(|p| p.dim).ok_or_else(|| Error::InvalidCluster("no patches".into()))?,
    };
    if d != 2 && d != 3 {
        return Err(Error::InvalidCluster(format!("unsupported dimension {d}")));
    }
    let patches = f
        .patches
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            if p.dim != d {
                return Err(Error::InvalidCluster(format!("patch {i} has dimension {}", p.dim)));
            }
            let vertices = p.vertices.iter().map(|v| point(v, d, &format!("patch {i} vertex"))).collect::<Result<_>>()?;
            Ok(SurfacePatch { surface_id: p.surface_id, dim: d, vertices, simplices: p.simplices, sigma: p.sigma })
        })
        .collect::<Result<Vec<_>>>()?;
    let junctions = f
        .junctions
        .into_iter()
        .map(|j| TripleJunction { tj_id: j.tj_id, incident: j.incident, orientation: j.orientation, correspondence: j.correspondence })
        .collect();
    let boundaries = f
        .boundaries
        .into_iter()
        .map(|b| {
            Ok(BoundaryLine {
                bl_id: b.bl_id,
                incident: b.incident,
                plane_point: point(&b.plane_point, d, "plane_point")?,
                plane_normal: point(&b.plane_normal, d, "plane_normal")?,
                contact_param: b.contact_param,
                chain: b.chain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let regions = f
        .regions
        .into_iter()
        .map(|r| {
            Ok(Region {
                region_id: r.region_id,
                surface_set: r.surface_set,
                orientation: r.orientation,
                plane_set: r.plane_set,
                reference_point: point(&r.reference_point, d, "reference_point")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let energy_model = f.energy_model.to_model(d)?;
    Ok(Cluster { dim: d, patches, junctions, boundaries, regions, energy_model })
}

pub fn read_cluster(path: &Path) -> Result<Cluster> {
    cluster_from_json(&fs::read_to_string(path)?)
}

pub fn write_cluster(path: &Path, c: &Cluster) -> Result<()> {
    fs::write(path, cluster_to_json(c)?)?;
    Ok(())
}

/// Vertices of a curve patch in traversal order; closed curves repeat the first vertex.
fn curve_order(p: &SurfacePatch) -> Vec<usize> {
    let n = p.vertices.len();
    let mut next = vec![usize::MAX; n];
    let mut has_prev = vec![false; n];
    for s in &p.simplices {
        next[s[0]] = s[1];
        has_prev[s[1]] = true;
    }
    let start = (0..n).find(|&v| !has_prev[v] && next[v] != usize::MAX).unwrap_or(0);
    let mut out = vec![start];
    let mut cur = start;
    while next[cur] != usize::MAX && out.len() <= n {
        cur = next[cur];
        out.push(cur);
        if cur == start {
            break;
        }
    }
    out
}

/// Write a frame. 2D: CSV polylines, one block per curve. 3D: OBJ with one
/// object per patch plus a JSON sidecar (same stem) listing junction and
/// boundary chains as 1-based OBJ vertex indices.
pub fn write_frame(c: &Cluster, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    if c.dim == 2 {
        for (i, p) in c.patches.iter().enumerate() {
            if i > 0 {
                w.write_all(b"\n")?;
            }
            for v in curve_order(p) {
                let x = p.vertices[v];
                writeln!(w, "{},{}", fmt_f64(x.x), fmt_f64(x.y))?;
            }
        }
        w.flush()?;
        return Ok(());
    }
    let mut offset = Vec::with_capacity(c.patches.len());
    let mut base = 1;
    for (i, p) in c.patches.iter().enumerate() {
        offset.push(base);
        writeln!(w, "o surface_{i}")?;
        for x in &p.vertices {
            writeln!(w, "v {} {} {}", fmt_f64(x.x), fmt_f64(x.y), fmt_f64(x.z))?;
        }
        for s in &p.simplices {
            writeln!(w, "f {} {} {}", s[0] + base, s[1] + base, s[2] + base)?;
        }
        base += p.vertices.len();
    }
    w.flush()?;
    #[derive(Serialize)]
    struct Chains {
        junctions: Vec<JunctionChains>,
        boundaries: Vec<BoundaryChain>,
    }
    #[derive(Serialize)]
    struct JunctionChains {
        tj_id: usize,
        surfaces: [usize; 3],
        chains: [Vec<usize>; 3],
    }
    #[derive(Serialize)]
    struct BoundaryChain {
        bl_id: usize,
        surface: usize,
        chain: Vec<usize>,
    }
    let sidecar = Chains {
        junctions: c
            .junctions
            .iter()
            .map(|j| {
                let s = j.surfaces();
                JunctionChains {
                    tj_id: j.tj_id,
                    surfaces: s,
                    chains: [0, 1, 2].map(|k| j.correspondence[k].iter().map(|v| v + offset[s[k]]).collect()),
                }
            })
            .collect(),
        boundaries: c
            .boundaries
            .iter()
            .map(|b| BoundaryChain { bl_id: b.bl_id, surface: b.surface(), chain: b.chain.iter().map(|v| v + offset[b.surface()]).collect() })
            .collect(),
    };
    fs::write(path.with_extension("json"), to_json_string(&sidecar)?)?;
    Ok(())
}

/// Either a scenario name or a name with generator parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Name(String),
    Spec {
        name: String,
        #[serde(flatten)]
        params: ScenarioParams,
    },
}

impl ScenarioRef {
    pub fn name(&self) -> &str {
        match self {
            ScenarioRef::Name(n) | ScenarioRef::Spec { name: n, .. } => n,
        }
    }

    pub fn params(&self) -> ScenarioParams {
        match self {
            ScenarioRef::Name(_) => ScenarioParams::default(),
            ScenarioRef::Spec { params, .. } => params.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeConfig {
    #[default]
    Sp,
    Bgn,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKindConfig {
    #[default]
    Direct,
    SchurCg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max")]
    pub max: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max() -> usize {
    100
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { tol: default_tol(), max: default_max() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, relative to the config file.
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Diagnostics CSV file name inside `dir`.
    #[serde(default = "default_csv")]
    pub csv: PathBuf,
    /// Times at which frames are written.
    #[serde(default)]
    pub frames: Vec<f64>,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_csv() -> PathBuf {
    PathBuf::from("diagnostics.csv")
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), csv: default_csv(), frames: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Option<ScenarioRef>,
    /// Cluster JSON, relative to the config file.
    #[serde(default)]
    pub cluster_file: Option<PathBuf>,
    pub dt: f64,
    #[serde(rename = "T_final")]
    pub t_final: f64,
    #[serde(default)]
    pub mode: ModeConfig,
    /// Overrides the energy model of the cluster when present.
    #[serde(default)]
    pub energy: Option<EnergyConfig>,
    /// Contact parameters; a single value applies to every boundary line.
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub linear_solver: SolverKindConfig,
}

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt,
            mode: match self.mode {
                ModeConfig::Sp => Mode::Sp,
                ModeConfig::Bgn => Mode::Bgn,
            },
            picard_tol: self.picard.tol,
            picard_max: self.picard.max,
            linear_solver: match self.linear_solver {
                SolverKindConfig::Direct => LinearSolverKind::Direct,
                SolverKindConfig::SchurCg => LinearSolverKind::SchurCg,
            },
        }
    }

    /// Build the initial cluster; relative paths resolve against `base`.
    pub fn initial_cluster(&self, base: &Path) -> Result<Cluster> {
        let mut c = match (&self.scenario, &self.cluster_file) {
            (Some(s), None) => crate::scenarios::build_scenario(s.name(), &s.params())?,
            (None, Some(f)) => read_cluster(&base.join(f))?,
            _ => return Err(Error::Config("exactly one of 'scenario' and 'cluster_file' must be given".into())),
        };
        if let Some(e) = &self.energy {
            c.energy_model = e.to_model(c.dim)?;
        }
        if !self.rho.is_empty() {
            c.set_contact_params(&self.rho)?;
        }
        Ok(c)
    }
}
