use thiserror::Error;

/// Failure of a CLI command, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid config or sweep file. Exit 2.
    #[error("{0}")]
    Config(String),
    /// A slot has no allocation meeting its floors. Exit 3.
    #[error("{0}")]
    Infeasible(String),
    /// Anything else. Exit 1.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<dfrc_core::Error> for CliError {
    fn from(e: dfrc_core::Error) -> Self {
        match e {
            dfrc_core::Error::Config(msg) => CliError::Config(msg),
            dfrc_core::Error::Infeasible { reason, .. } => CliError::Infeasible(reason),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}
