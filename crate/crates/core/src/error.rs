use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("environment tensor vanished; the current network is orthogonal to the target")]
    DegenerateEnvironment,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{}: {msg}", location(path, *line))]
    Load { path: PathBuf, line: usize, msg: String },
    #[error("config: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn location(path: &std::path::Path, line: usize) -> String {
    if line == 0 {
        path.display().to_string()
    } else {
        format!("{}:{line}", path.display())
    }
}

impl Error {
    /// `line` is 1-based; 0 means the whole file.
    pub(crate) fn load(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Load { path: path.into(), line, msg: msg.into() }
    }
}
