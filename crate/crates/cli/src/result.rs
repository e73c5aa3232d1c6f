//! Result files (JSON). Every file carries `schema_version`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub state: usize,
    pub action: usize,
    pub action_name: String,
    pub reward: f64,
    pub next_state: usize,
    /// Grid cell before and after the step, as `[row, col]`.
    pub from: [usize; 2],
    pub to: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalInfo {
    pub reached: bool,
    pub state: usize,
    pub flags: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentValue {
    pub agent_id: usize,
    pub name: String,
    pub caring_coefficient: f64,
    pub expected_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub grid: Vec<String>,
    pub start: [usize; 2],
    pub converged: bool,
    pub iterations: usize,
    pub initial_value: f64,
    pub policy: Vec<usize>,
    pub trajectory: Vec<TrajectoryStep>,
    pub discounted_return: f64,
    pub terminal: TerminalInfo,
    /// Other agents' expected values at the state where the episode ended.
    pub agent_values: Vec<AgentValue>,
    pub duration_ms: f64,
}

impl RunResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: RunResult = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema_version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Copy with the wall-clock field zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        RunResult {
            duration_ms: 0.0,
            ..self.clone()
        }
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.terminal.flags.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }
}
