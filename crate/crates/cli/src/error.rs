use std::process::ExitCode;

use benney_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Generation(_) | CliError::Io { .. } => 3,
            CliError::Verification(_) => 4,
        })
    }

    /// Parameter and parse errors are configuration problems; anything else
    /// raised while building a family is a numerical failure.
    pub fn from_build(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Parse { .. } => CliError::Config(e.to_string()),
            e => CliError::Generation(e.to_string()),
        }
    }

    pub fn generation(e: Error) -> Self {
        CliError::Generation(e.to_string())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
