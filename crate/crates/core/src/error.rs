use std::path::PathBuf;

use thiserror::Error;

use crate::config::Violation;

/// Errors surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration ({} violation(s)): {}", .0.len(), summarize(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("score table error in {path}: {message}")]
    ScoreTable { path: PathBuf, message: String },

    #[error("sweep error: {0}")]
    Sweep(String),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn domain(msg: impl Into<String>) -> SimError {
    SimError::Domain(msg.into())
}
