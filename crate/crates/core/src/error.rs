use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record that could not be decoded. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Structurally valid input that violates the file format contract.
    #[error("format error: {0}")]
    Format(String),

    #[error("insufficient labels: need at least one passing and one failing run (got {passed} passing, {failed} failing)")]
    InsufficientLabels { passed: usize, failed: usize },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("universe mismatch: tree was trained on universe {expected}, input has {found}")]
    UniverseMismatch { expected: String, found: String },

    #[error("empty ranking: {0}")]
    EmptyRanking(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Parse { .. } | Error::Format(_) => 4,
            Error::InsufficientLabels { .. } => 5,
            Error::Consistency(_) | Error::UniverseMismatch { .. } => 6,
            Error::LengthMismatch { .. } | Error::EmptyRanking(_) | Error::InvalidArgument(_) => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
