use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes of the `twopar` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const INVALID_INPUT: i32 = 3;
    pub const ORACLE_INFEASIBLE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] twopar_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(twopar_core::Error::TooLarge { .. }) => exit::ORACLE_INFEASIBLE,
            _ => exit::INVALID_INPUT,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
