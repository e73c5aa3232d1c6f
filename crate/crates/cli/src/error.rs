use std::path::Path;

use considerate_core::{MapError, MdpError, ScenarioError};
use thiserror::Error;

/// Exit-code contract: 0 success, 1 domain failure, 2 I/O or parse failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io { .. } | CliError::Parse(_) => 2,
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        CliError::Domain(format!("map: {e}"))
    }
}

impl From<MdpError> for CliError {
    fn from(e: MdpError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Map(e) => e.into(),
            ScenarioError::Mdp(e) => e.into(),
        }
    }
}
