use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point outside the physical domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e} exceeds {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver did not converge: {0}")]
    Convergence(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("energy shell too close to the spectral edge: {0}")]
    EdgeProximity(String),

    #[error("band profile has no populated bins")]
    EmptyProfile,

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("shell acceptance {0:e} below threshold; energy outside reachable range")]
    ZeroAcceptance(f64),

    #[error("region unbounded along direction {0:?}")]
    UnboundedRegion(Vec<f64>),

    #[error("grid inadequate: {0}")]
    Grid(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
