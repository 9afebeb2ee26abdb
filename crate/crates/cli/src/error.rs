use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] linsys_quanta::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid argument {flag}: {message}")]
    Argument { flag: String, message: String },
    #[error("{0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn argument(flag: &str, message: impl Into<String>) -> Self {
        CliError::Argument {
            flag: flag.into(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "Io",
            CliError::Argument { .. } => "InvalidArgument",
            CliError::VerificationFailed(_) => "VerificationFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Io { .. } | CliError::Argument { .. } => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": { "code": self.code(), "message": self.to_string() } }).to_string()
    }
}
