use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

use extremis_core::extremism::ScoreError;
use extremis_core::ingest::IngestError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("store {0} is locked by another run")]
    Locked(PathBuf),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("scored CSV not found: {0} (run `score` first)")]
    MissingScored(PathBuf),
    #[error("row {row}: {message}")]
    Validation { row: usize, message: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Locked(_) | CliError::Ingest(_) => 2,
            CliError::Score(_) => 3,
            CliError::MissingScored(_) => 4,
            CliError::Validation { .. } => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Locked(_) => "locked",
            CliError::Ingest(IngestError::Credential(_)) => "credential",
            CliError::Ingest(IngestError::RateLimited { .. }) => "rate_limited",
            CliError::Ingest(IngestError::NotFound(_)) => "not_found",
            CliError::Ingest(_) => "ingest",
            CliError::Score(_) => "degenerate_corpus",
            CliError::MissingScored(_) => "missing_scored",
            CliError::Validation { .. } => "validation",
        }
    }

    /// One-line JSON for standard error.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Validation { row, .. } => v["row"] = json!(row),
            CliError::Ingest(IngestError::RateLimited { retry_after }) => {
                v["retry_after_secs"] = json!(retry_after.as_secs())
            }
            _ => {}
        }
        v.to_string()
    }
}
