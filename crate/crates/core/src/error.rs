use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by solvers, oracles and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Input or solution violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// Geometry with a zero-length side where a proper rectangle is required.
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// Exact oracle asked to solve an instance beyond its size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
