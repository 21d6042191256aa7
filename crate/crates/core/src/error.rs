use thiserror::Error;

/// Errors raised by the cone and operator-system engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cone is not proper ({0})")]
    NotProper(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("iteration cap reached after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    #[error("level {level} exceeds truncation {truncation}")]
    LevelExceedsTruncation { level: usize, truncation: usize },

    #[error("tensor family is empty")]
    EmptyFamily,

    #[error("family entry {index} violates the intrinsic sign condition")]
    SignConditionViolated { index: usize },

    #[error("map is not positive: {0}")]
    NotPositive(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
