use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("index {index} out of range (valid: {valid})")]
    IndexOutOfRange { index: u64, valid: String },

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("hypothesis violated at index {index}: {detail}")]
    HypothesisViolation { index: usize, detail: String },

    #[error("missing reference: {0}")]
    MissingReference(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
