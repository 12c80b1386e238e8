use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate simplex: surface {surface}, element {element} (measure {measure:e})")]
    DegenerateSimplex {
        surface: usize,
        element: usize,
        measure: f64,
    },

    #[error("invalid cluster: {0}")]
    InvalidCluster(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid anisotropy: {0}")]
    InvalidAnisotropy(String),

    #[error(
        "Picard iteration did not converge in {iterations} iterations \
         (last displacement {displacement:e}, tolerance {tolerance:e}); \
         reduce the time step or raise picard.max"
    )]
    PicardNotConverged {
        iterations: usize,
        displacement: f64,
        tolerance: f64,
    },

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that happen while time stepping, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSimplex { .. } | Error::PicardNotConverged { .. } | Error::LinearSolver(_)
        )
    }
}
