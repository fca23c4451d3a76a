use std::io;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("solver error: {0}")]
    Solver(#[from] qgraph_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let kind = match self {
            CliError::Schema(_) => "schema",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
        };
        ErrorRecord { kind, exit_code: self.exit_code(), message: self.to_string() }
    }
}
