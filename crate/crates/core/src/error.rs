use thiserror::Error;

/// Errors raised anywhere in the extraction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a domain invariant.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A document could not be parsed. `path` names the offending field.
    #[error("parse error at {path}: {reason}")]
    Parse { path: String, reason: String },

    #[error("image codec error: {0}")]
    Codec(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no consistent scale: {0}")]
    NoConsistentScale(String),

    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
