//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by graph construction, estimation, and selection.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A precondition or parameter check failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact oracle was asked to enumerate more state than its hard cap allows.
    #[error("instance too large for exact enumeration: {0}")]
    LimitExceeded(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
