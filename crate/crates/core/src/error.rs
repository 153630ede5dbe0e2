use thiserror::Error;

use crate::qkz::ConditionReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-generic sampling failure: {condition}")]
    NonGenericSampling { condition: String },

    #[error("non-generic parameters: {0}")]
    NonGeneric(String),

    #[error("parameter mismatch singularity: {0}")]
    ParameterSingularity(String),

    #[error("spectral-parameter pole in {what} (|denominator| = {modulus:e})")]
    Pole { what: String, modulus: f64 },

    #[error("size refusal: {0}")]
    SizeCap(String),

    #[error("zero coordinate in point of (C*)^n")]
    ZeroCoordinate,

    #[error("non-generic principal series point (basis rank deficient)")]
    PrincipalSeries,

    #[error("intertwiner degenerate: {0}")]
    IntertwinerDegenerate(String),

    #[error("non-generic spectrum at lambda {lambda:?}: joint kernel has dimension {dim}")]
    NonGenericSpectrum { lambda: Vec<i32>, dim: usize },

    #[error("m-condition unsatisfied for m = {}: lhs {} vs rhs {}", .0.m, .0.lhs, .0.rhs)]
    ConditionUnsatisfied(Box<ConditionReport>),

    #[error("divisibility defect: remainder {remainder:e} after exact division")]
    Divisibility { remainder: f64 },

    #[error("span for lambda {lambda:?} is not stable under the Y-operators (leak {leak:e})")]
    SpanLeak { lambda: Vec<i32>, leak: f64 },

    #[error("internal defect: {0}")]
    Defect(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 2 for refusals and bad input, 3 for internal defects.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divisibility { .. } | Error::SpanLeak { .. } | Error::Defect(_) => 3,
            _ => 2,
        }
    }
}
