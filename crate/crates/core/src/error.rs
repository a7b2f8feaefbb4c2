use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DsmError>;

#[derive(Debug, Error)]
pub enum DsmError {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The computation has no meaningful answer for the given data
    /// (all-zero far field, all-zero map, undefined SNR).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl DsmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DsmError::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        DsmError::Degenerate(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DsmError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        DsmError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
