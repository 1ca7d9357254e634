use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed validation; `path` is the dotted key.
    #[error("{path}: {reason}")]
    Config { path: String, reason: String },

    #[error("malformed configuration document: {0}")]
    Malformed(String),

    #[error("unknown scenario `{name}`; registered scenarios: {}", available.join(", "))]
    UnknownScenario { name: String, available: Vec<String> },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bundle {path}: {reason}")]
    Bundle { path: PathBuf, reason: String },
}

impl Error {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { path: path.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
