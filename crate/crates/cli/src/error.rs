use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: corrupt artifact: {reason}")]
    Artifact { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] mcl_core::MclError),
    #[error("{} check(s) failed:\n  {}", .0.len(), .0.join("\n  "))]
    Assertion(Vec<String>),
}

impl CliError {
    /// 1 for failed assertions, 2 for everything the caller got wrong.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
