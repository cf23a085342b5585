use std::process::ExitCode;

/// Failure categories, each with a fixed exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, unreadable input files, or a request the server
    /// rejected as a client error.
    #[error("{0}")]
    Usage(String),
    #[error("server refused the request ({status} {code}): {message}")]
    Rejected { status: u16, code: String, message: String },
    #[error("{0}")]
    Transport(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Rejected { status, .. } if *status < 500 => 2,
            CliError::Rejected { .. } | CliError::Transport(_) => 3,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Rejected { status, code, message } => serde_json::json!({
                "error": code, "status": status, "message": message
            }),
            CliError::Usage(m) => serde_json::json!({ "error": "Usage", "message": m }),
            CliError::Transport(m) => serde_json::json!({ "error": "Transport", "message": m }),
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION_FAILED: u8 = 1;
