use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value encountered in {context}")]
    NonFiniteValue { context: &'static str },

    #[error("symmetric eigensolve did not converge")]
    EigenFailure,

    #[error("metric is singular at the requested point")]
    SingularMetric,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("level set F + w = {level:e} is degenerate")]
    DegenerateLevel { level: f64 },

    #[error("gauge matrix violates (F + w) det T = 1 (deviation {deviation:e})")]
    BadGauge { deviation: f64 },

    #[error("gauge matrix is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("stationary point of W is not isolated (min |eigenvalue| = {min_eigenvalue:e})")]
    NonUniqueSuspect { min_eigenvalue: f64 },

    #[error("h + i vecA is singular")]
    SingularHStar,

    #[error("grid fields do not share a grid: {reason}")]
    GridMismatch { reason: String },

    #[error("grid too small: need at least {required} points per axis, got {got}")]
    GridTooSmall { required: usize, got: usize },

    #[error("ellipticity lost: min Hessian eigenvalue {min_eigenvalue:e} along the iterates")]
    EllipticityLost { min_eigenvalue: f64 },

    #[error("iterate left the chart (|y| = {radius} exceeds {limit})")]
    ChartOverflow { radius: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], context: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteValue { context })
    }
}
