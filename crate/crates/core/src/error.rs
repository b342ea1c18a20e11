use thiserror::Error;

/// Failure modes shared by every layer of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector field has no sign change in (0, theta)")]
    NoEquilibrium,

    #[error("integration failed near t={t} (step {h})")]
    IntegrationFailure { t: f64, h: f64 },

    #[error("the trajectory from 0 never reaches theta at A={amplitude}")]
    NoSpikeRegime { amplitude: f64 },

    #[error("boundary Sigma_{n} is absent")]
    BoundaryAbsent { n: u32 },

    #[error("no root for curve {kind} at d={d}")]
    NoRoot { kind: String, d: f64 },

    #[error("curve ordering violated at d={d}: {detail}")]
    OrderingViolation { d: f64, detail: String },

    #[error("orbit point {x} lies within tolerance of Sigma_{n}={sigma}")]
    DegenerateBoundary { x: f64, n: u32, sigma: f64 },

    #[error("staircase not monotone: {detail}")]
    MonotonicityViolation { detail: String },

    #[error("period adding violated: {detail}")]
    AddingViolation { detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) => 2,
            Error::OrderingViolation { .. }
            | Error::MonotonicityViolation { .. }
            | Error::AddingViolation { .. } => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
