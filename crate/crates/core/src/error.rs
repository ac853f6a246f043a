use thiserror::Error;

use crate::symbol_algebra::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("grid needs {points} points, budget is {budget}")]
    BudgetExceeded { points: u128, budget: u128 },
    #[error("exponent {exponent} is outside the working window ±{limit}")]
    WindowExceeded { exponent: i64, limit: i64 },
    #[error("psi1 vanishes at norm exponent {at}")]
    Psi1Vanishes { at: String },
    #[error("Hypothesis A violated: {reason}")]
    HypothesisAViolation { reason: String },
    #[error("series tail not controlled: {reason}")]
    TailNotControlled { reason: String },
    #[error("pointwise value at the origin is not defined")]
    OriginNotDefined,
    #[error("heat kernel at t = 0 is the Dirac delta")]
    TZeroIsDelta,
    #[error("precondition failed: {reason}")]
    PreconditionFailed { reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
