//! Scenario runner behind the `levitosim` binary: config parsing, named
//! reproduction scenarios, deterministic CSV output, and a built-in
//! invariant check suite.

pub mod check;
pub mod config;
pub mod scenario;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, unknown scenario, or unreadable input. Exit 2.
    #[error("config error: {0}")]
    Config(String),
    /// Numerical failure while evaluating a scenario. Exit 3.
    #[error("numerical error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<levitodyn::Error> for CliError {
    fn from(e: levitodyn::Error) -> Self {
        match e {
            levitodyn::Error::InvalidParameter(msg) => CliError::Config(msg),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
