//! Failures of a command and their exit codes.

use std::io;
use std::path::PathBuf;

use serde_json::json;

use crate::config::ConfigError;
use crate::snapshot::SnapshotError;

pub const EXIT_OK: i32 = 0;
/// A diagnostic check ran to completion and failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_IO: i32 = 4;
/// The numerics refused the input (for example a non-contracting Picard map).
pub const EXIT_NUMERICAL: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot read snapshot {path}: {source}")]
    Snapshot { path: PathBuf, source: SnapshotError },
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("{0}")]
    Numerical(supwave_core::Error),
    #[error("{failed} check(s) failed")]
    ChecksFailed { failed: usize },
}

impl From<supwave_core::Error> for CliError {
    fn from(e: supwave_core::Error) -> Self {
        match e {
            supwave_core::Error::BlowUp { t } => CliError::BlowUp { t },
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Snapshot { .. } => EXIT_IO,
            CliError::BlowUp { .. } => EXIT_BLOW_UP,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::ChecksFailed { .. } => EXIT_CHECK_FAILED,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } | CliError::Snapshot { .. } => "io",
            CliError::BlowUp { .. } => "blow_up",
            CliError::Numerical(_) => "numerical",
            CliError::ChecksFailed { .. } => "checks_failed",
        }
    }

    /// One-line JSON record for standard error.
    pub fn record(&self) -> serde_json::Value {
        let mut rec = json!({
            "record": "error",
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Config(e) => rec["issues"] = json!(e.issues),
            CliError::BlowUp { t } => rec["t"] = json!(t),
            _ => {}
        }
        rec
    }
}
