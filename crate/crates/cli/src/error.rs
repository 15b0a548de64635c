use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("config: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        CliError::Config { line, message: message.into() }
    }

    /// Process exit status: 2 for configuration problems, 3 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Invalid(_) => 2,
            CliError::Io { .. } | CliError::Csv { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
