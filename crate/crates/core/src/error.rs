use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the operator model and its checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),

    #[error("truncation length {given} is too small (need at least {min})")]
    TruncationTooSmall { given: usize, min: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fiber dimension mismatch: expected {expected}, found {found}")]
    FiberMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point {z} lies outside the evaluation domain (radius {radius})")]
    Domain { z: Complex64, radius: f64 },

    #[error("lambda = 0 is a degenerate parameter for {0}")]
    DegenerateParameter(&'static str),

    #[error("lambda = {lambda} is outside the resolvent domain: {reason}")]
    OutsideDomain { lambda: Complex64, reason: String },

    #[error("lambda = {lambda} hits the spectrum of the restriction (sigma_min = {sigma_min:e})")]
    SpectrumHit { lambda: Complex64, sigma_min: f64 },

    #[error("generators are numerically dependent (gram condition number {condition:e})")]
    DependentGenerators { condition: f64 },

    #[error("span is not invariant under L: closure residual {residual:e} exceeds {tolerance:e}")]
    NotInvariant { residual: f64, tolerance: f64 },

    #[error("function is not a member of the subspace (relative residual {residual:e})")]
    NotInSubspace { residual: f64 },

    #[error("relative residual is undefined for the zero function")]
    ZeroFunction,

    #[error("{what}: residual {residual:e} exceeds budget {budget:e}")]
    ToleranceExceeded {
        what: &'static str,
        residual: f64,
        budget: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
