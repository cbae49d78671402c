//! Command implementations behind the `phasorq` binary.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input file. Exit code 2.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A verification run found a mismatch. Exit code 1.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Internal(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) | CliError::Internal(_) => 1,
        }
    }
}

impl From<phasorq::Error> for CliError {
    fn from(e: phasorq::Error) -> Self {
        match e {
            phasorq::Error::Input(_) | phasorq::Error::Parse { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Internal(other.into()),
        }
    }
}
