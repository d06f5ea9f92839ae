use thiserror::Error;

/// Errors raised by construction and evaluation routines.
///
/// Verification outcomes (a property failing on a grid) are not errors; they
/// are reported through [`crate::report::CriterionReport`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("small divisor: {0}")]
    SmallDivisor(String),
    #[error("assembly failed at level {level}: {reason}")]
    Assembly { level: usize, reason: String },
    #[error("corrupted ceiling: {0}")]
    CorruptedCeiling(String),
    #[error("integrator failure: {0}")]
    Stiffness(String),
}

pub type Result<T> = std::result::Result<T, Error>;
