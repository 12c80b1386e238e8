//! Structure-preserving parametric finite elements for surface diffusion of
//! curve networks in the plane and surface clusters in space.
//!
//! A [`Cluster`] holds surface patches glued along triple junctions, boundary
//! lines on planar substrates, and enclosed regions. [`Simulation`] advances
//! it in time; every step conserves the enclosed volumes exactly and does not
//! increase the total energy.

pub mod anisotropy;
pub mod assembly;
pub mod cluster;
pub mod diagnostics;
pub mod dofs;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod runner;
pub mod scenarios;
pub mod solver;
pub mod validate;

pub use anisotropy::{Anisotropy, AnisotropyKind};
pub use cluster::{BoundaryLine, Cluster, EnergyModel, Point, Positions, Region, SurfacePatch, TripleJunction};
pub use diagnostics::{CsvWriter, StepDiagnostics};
pub use error::{Error, Result};
pub use linalg::LinearSolverKind;
pub use solver::{Mode, Simulation, SolverConfig, StepOutcome};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
