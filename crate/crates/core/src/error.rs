use std::ops::RangeInclusive;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty interval: b ({b}) must exceed a ({a})")]
    EmptyInterval { a: f64, b: f64 },
    #[error("need at least {min} steps, got {got}")]
    TooFewSteps { min: usize, got: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index range mismatch: expected {expected:?}, got {got:?}")]
    RangeMismatch {
        expected: RangeInclusive<usize>,
        got: RangeInclusive<usize>,
    },
    #[error("order alpha = {0} outside (0, 1]")]
    InvalidOrder(f64),
    #[error("classical schemes require alpha = 1, got {0}")]
    ClassicalOrder(f64),
    #[error("coefficient table has {available} entries, need {needed}")]
    InsufficientCoefficients { available: usize, needed: usize },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("endpoint {which} of the initial guess does not match the boundary data")]
    BoundaryMismatch { which: &'static str },
    #[error("model is not quadratic; the linear oracle does not apply")]
    NotQuadratic,
    #[error("assembled linear system is singular")]
    SingularMatrix,
    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("stepping failed at node {index}: residual {residual:e}")]
    StepFailed { index: usize, residual: f64 },
    #[error("operation requires a classical scheme")]
    NotClassical,
}
