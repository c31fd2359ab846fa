use crate::config::Position;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{position}: {message}")]
    Config { position: Position, message: String },
    #[error(transparent)]
    Core(#[from] wgqed_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("self-test failed: {failed} of {total} checks")]
    SelftestFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn config(position: Position, message: impl Into<String>) -> Self {
        CliError::Config { position, message: message.into() }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        use wgqed_core::Error as E;
        match self {
            CliError::Config { .. } => "config",
            CliError::Core(E::InvalidParam { .. } | E::Domain { .. }) => "domain",
            CliError::Core(E::Capacity { .. }) => "capacity",
            CliError::Core(E::Format(_)) => "format",
            CliError::Core(E::Inconsistent(_)) => "inconsistent",
            CliError::Core(_) => "numerical",
            CliError::Io { .. } => "io",
            CliError::SelftestFailed { .. } => "selftest",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "selftest" => 1,
            "config" => 2,
            "domain" | "capacity" | "format" => 3,
            "numerical" | "inconsistent" => 4,
            _ => 5,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        });
        if let CliError::Config { position, .. } = self {
            v["error"]["source"] = position.source.clone().into();
            v["error"]["line"] = position.line.into();
            v["error"]["column"] = position.column.into();
        }
        v
    }
}
