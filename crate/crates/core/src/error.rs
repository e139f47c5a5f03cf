use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Malformed input data: shapes, symmetry, signature, JSON structure.
    #[error("schema violation: {0}")]
    Schema(String),

    /// The problem is valid data but falls outside the regimes the index
    /// theorems cover, or fails one of the structural hypotheses.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("Y is not timelike at t = {t} (g(Y,Y) = {value})")]
    NotTimelike { t: f64, value: f64 },

    #[error("timelike geodesic: perturbation along a timelike direction is not available")]
    TimelikeGeodesic,

    #[error("direction is not spacelike (g(e,e) = {0})")]
    NotSpacelike(f64),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("empty constraint kernel at sigma = {sigma}")]
    EmptyKernel { sigma: f64 },

    #[error("ode step count too small: Richardson estimate {estimate:e} exceeds {tolerance:e}")]
    StepCountTooSmall { estimate: f64, tolerance: f64 },

    #[error("non-symmetric matrix (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("discretization failure: {0}")]
    Discretization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
