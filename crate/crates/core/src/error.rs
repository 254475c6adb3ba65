use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The topic carries no activity at all, so no distribution can be formed.
    #[error("degenerate topic `{0}`: total activity is zero")]
    DegenerateTopic(String),

    #[error("incompatible vectors: lengths {left} and {right}")]
    IncompatibleVectors { left: usize, right: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("duplicate entry for topic `{topic}` on {date}")]
    DuplicateKey { topic: String, date: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InsufficientData(_) => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}
