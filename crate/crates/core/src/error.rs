use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("non-finite function value while differentiating numerically")]
    NonFiniteEvaluation,

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("response {value} at row {row} is not strictly inside (0, 1)")]
    BoundaryResponse { row: usize, value: f64 },

    #[error("estimate of parameter {0} is infinite")]
    InfiniteEstimate(usize),

    #[error("fit did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    DidNotConverge {
        iterations: usize,
        gradient_norm: f64,
        last: Vec<f64>,
    },

    #[error("constrained fit failed: {0}")]
    ConstrainedFitFailed(String),

    #[error("negative log-likelihood ratio {0:e}")]
    NegativeDeviance(f64),

    #[error("simplex exceeded its pivot limit")]
    LpCycleLimit,

    #[error("grid [{lower}, {upper}] does not bracket the interval endpoints")]
    GridTooNarrow { lower: f64, upper: f64 },

    #[error("{failed} of {total} bootstrap refits failed")]
    RefitFailures { failed: usize, total: usize },

    #[error("bootstrap variance is zero")]
    ZeroVariance,

    #[error("invalid bootstrap plan: {0}")]
    InvalidPlan(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }
}
