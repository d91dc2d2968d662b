use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("action violates the bandwidth constraint: {0}")]
    Constraint(String),

    #[error("replay buffer holds {available} transitions, batch needs {needed}")]
    InsufficientBuffer { available: usize, needed: usize },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("the drl allocator needs a checkpoint")]
    MissingCheckpoint,

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// Process exit code: 1 for user-facing validation problems, 2 for
    /// everything that went wrong at runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Validation { .. } | Error::MissingCheckpoint => 1,
            _ => 2,
        }
    }
}
