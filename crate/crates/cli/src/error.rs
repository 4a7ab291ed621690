use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command layer, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Ingest { path: PathBuf, msg: String },
    #[error("numeric error: {0}")]
    Numeric(#[from] wcosinor_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn ingest(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Ingest {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 ingestion, 3 numeric or degenerate design, 4 configuration, 1 output IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Ingest { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::Config(_) => 4,
            CliError::Output { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
