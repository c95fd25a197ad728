use std::io;

use serde_json::json;

/// Failure of a subcommand, carrying the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(#[from] fluxfsp_core::Error),
    #[error("error bound violated: {0}")]
    BoundViolation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            // Unreadable inputs and unwritable outputs are configuration problems.
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::BoundViolation(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Solver(_) => "solver",
            CliError::BoundViolation(_) => "bound_violation",
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        json!({ "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.to_string() } })
            .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
