use std::io;
use std::path::PathBuf;

use pneumabond_core::{ParamError, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}{}: {message}", key.as_deref().map(|k| format!(", key `{k}`")).unwrap_or_default())]
    Parse {
        line: usize,
        key: Option<String>,
        message: String,
    },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl From<ParamError> for Error {
    fn from(e: ParamError) -> Self {
        Error::Validation(e.to_string())
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
