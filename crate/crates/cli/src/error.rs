use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] refocus_core::Error),
}

impl CliError {
    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Returns the value or a usage error naming the missing flag.
pub fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option {flag}")))
}
