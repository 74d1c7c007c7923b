//! Error types shared across the crate.

use thiserror::Error;

/// Failures of the analytic torus geometry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("the four embedded points do not span a hyperplane")]
    AffinelyDependent,
    #[error("hyperplane does not cut the torus in a curve (c = {c} >= a' + b' = {limit})")]
    EmptyBoundary { c: f64, limit: f64 },
    #[error("hyperplane normal is zero or not finite")]
    DegenerateNormal,
    #[error("invalid cap parameters: {0}")]
    InvalidCap(String),
}

/// Failures of the point-process samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("invalid Poisson rate {0}: must be finite and non-negative")]
    InvalidRate(f64),
}

/// Failures of the hull builder.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    #[error("exact orientation determinant vanished: {0}")]
    DegeneratePredicateTie(String),
}

/// Failures of the measure-function estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("no cap records to estimate from")]
    EmptyInput,
    #[error("thresholds must be finite and sorted ascending")]
    InvalidThresholds,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid fit range [{t_min}, {t_max}]: need 0 < t_min < t_max < 1/2")]
    InvalidRange { t_min: f64, t_max: f64 },
}

/// Argument outside the domain of a closed-form expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{name}: argument {value} outside domain {domain}")]
pub struct DomainError {
    pub name: &'static str,
    pub value: f64,
    pub domain: &'static str,
}

/// Crate-level error, wrapping the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for broken internal invariants and exact
    /// predicate ties, 1 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvariantViolation(_) | Error::Hull(_) => 2,
            _ => 1,
        }
    }
}
