//! Presets, configuration, orchestration and CSV/JSON output for the
//! `twoslit` command.

use std::path::PathBuf;

use twoslit::{ConfigError, RunAbort};

pub mod config;
pub mod output;
pub mod simulate;

pub use config::{BathSpec, Observable, Preset, SimulationConfig};
pub use output::write_outputs;
pub use simulate::{simulate, validate, Outcome, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid value '{value}' for '{key}': {reason}")]
    Parse {
        key: String,
        value: String,
        reason: String,
    },
    #[error("configuration rejected: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("run aborted, partial outputs written: {0}")]
    Aborted(RunAbort),
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Invalid(_) => "invalid-config",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Aborted(_) => "aborted",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Aborted(_) => 3,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Invalid(list) => v["violations"] = serde_json::json!(list),
            CliError::Parse { key, .. } => v["key"] = serde_json::json!(key),
            CliError::Aborted(_) => v["partial"] = serde_json::json!(true),
            _ => {}
        }
        v
    }
}
