//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use considerate_core::gridworld::ScenarioConfig;
use considerate_core::learn::Schedule;
use considerate_core::solve::{DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use considerate_core::Aggregator;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum World {
    FlowerGarden,
    Kitchen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SwfConfig {
    WeightedSum,
    Maximin,
    /// Omitted weights mean the classic `(2(n-k)+1)/n^2` weights.
    GeneralizedGini {
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

impl SwfConfig {
    pub fn label(&self) -> &'static str {
        match self {
            SwfConfig::WeightedSum => "weighted_sum",
            SwfConfig::Maximin => "maximin",
            SwfConfig::GeneralizedGini { .. } => "generalized_gini",
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AugmentationConfig {
    None,
    Aligned {
        aggregator: Aggregator,
        alpha2: f64,
    },
    PerAgent {
        swf: SwfConfig,
    },
    Options {
        alpha2: f64,
    },
    OptionValues {
        alpha2: f64,
        /// Value each anticipated option attaches to a state where it can start.
        #[serde(default = "one")]
        option_value: f64,
        /// Multiply the bonus by gamma, as the plain option augmentation does.
        #[serde(default)]
        discount_bonus: bool,
    },
}

impl AugmentationConfig {
    pub fn label(&self) -> String {
        match self {
            AugmentationConfig::None => "none".into(),
            AugmentationConfig::Aligned { aggregator, alpha2 } => {
                let agg = match aggregator {
                    Aggregator::Expected => "expected",
                    Aggregator::WorstCase => "worst_case",
                    Aggregator::PenalizeNegativeChange => "penalize_negative_change",
                };
                format!("aligned({agg}, alpha2={alpha2})")
            }
            AugmentationConfig::PerAgent { swf } => format!("per_agent({})", swf.label()),
            AugmentationConfig::Options { alpha2 } => format!("options(alpha2={alpha2})"),
            AugmentationConfig::OptionValues {
                alpha2,
                option_value,
                discount_bonus,
            } => format!(
                "option_values(alpha2={alpha2}, value={option_value}{})",
                if *discount_bonus { ", discounted" } else { "" }
            ),
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    ValueIteration {
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iters")]
        max_iters: usize,
    },
    QLearning {
        episodes: usize,
        learning_rate: Schedule,
        epsilon: Schedule,
        seed: u64,
        #[serde(default = "default_max_steps")]
        max_steps: usize,
    },
}

fn default_max_steps() -> usize {
    1_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::ValueIteration {
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

pub const SWEEP_PARAMETERS: [&str; 10] = [
    "alpha_self",
    "alpha_alice",
    "alpha_bob",
    "gamma",
    "step_reward",
    "trample_penalty",
    "fence_cost",
    "alpha2",
    "option_value",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub world: World,
    /// Map file, relative to the config file. Required for the flower garden.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_path: Option<PathBuf>,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    pub augmentation: AugmentationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    /// Reads a config and resolves `map_path` against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(map) = &config.map_path {
            if map.is_relative() {
                let dir = path.parent().unwrap_or(Path::new("."));
                config.map_path = Some(dir.join(map));
            }
        }
        Ok(config)
    }

    fn check(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.world == World::FlowerGarden && self.map_path.is_none() {
            return Err(CliError::Parse("flower_garden world needs map_path".into()));
        }
        if self.world == World::Kitchen
            && matches!(
                self.augmentation,
                AugmentationConfig::Aligned { .. } | AugmentationConfig::PerAgent { .. }
            )
        {
            return Err(CliError::Parse(
                "the kitchen world has no agent value models; use options or option_values".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if !SWEEP_PARAMETERS.contains(&sweep.parameter.as_str()) {
                return Err(CliError::Parse(format!(
                    "unknown sweep parameter {:?}; expected one of {}",
                    sweep.parameter,
                    SWEEP_PARAMETERS.join(", ")
                )));
            }
            self.with_parameter(&sweep.parameter, 0.0)?;
        }
        Ok(())
    }

    /// Copy of this config with one parameter overridden and the sweep removed.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        c.sweep = None;
        let s = &mut c.scenario;
        let missing = || CliError::Parse(format!("sweep parameter {name:?} does not apply to this configuration"));
        match name {
            "alpha_self" => s.alpha_self = value,
            "alpha_alice" => s.alpha_alice = value,
            "alpha_bob" => s.alpha_bob = value,
            "gamma" => s.gamma = value,
            "step_reward" => s.step_reward = value,
            "trample_penalty" => s.trample_penalty = value,
            "fence_cost" => s.fence_cost = value,
            "alpha2" => match &mut c.augmentation {
                AugmentationConfig::Aligned { alpha2, .. }
                | AugmentationConfig::Options { alpha2 }
                | AugmentationConfig::OptionValues { alpha2, .. } => *alpha2 = value,
                _ => return Err(missing()),
            },
            "option_value" => match &mut c.augmentation {
                AugmentationConfig::OptionValues { option_value, .. } => *option_value = value,
                _ => return Err(missing()),
            },
            "seed" => match &mut c.solver {
                SolverConfig::QLearning { seed, .. } => *seed = value as u64,
                _ => return Err(missing()),
            },
            _ => return Err(missing()),
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
world = "flower_garden"
map_path = "garden.map"

[augmentation]
kind = "per_agent"
swf = { kind = "weighted_sum" }
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.scenario, ScenarioConfig::default());
        assert_eq!(c.solver, SolverConfig::default());
        assert!(c.sweep.is_none());
    }

    #[test]
    fn sweep_parameters_must_exist() {
        let bad = format!("{MINIMAL}\n[sweep]\nparameter = \"alpha_carol\"\nvalues = [1.0]\n");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(CliError::Parse(_))));
        // alpha2 is not a field of the per-agent augmentation.
        let bad = format!("{MINIMAL}\n[sweep]\nparameter = \"alpha2\"\nvalues = [1.0]\n");
        assert!(matches!(ExperimentConfig::from_toml(&bad), Err(CliError::Parse(_))));
        let ok = format!("{MINIMAL}\n[sweep]\nparameter = \"alpha_alice\"\nvalues = [0.0, 1.0]\n");
        assert!(ExperimentConfig::from_toml(&ok).is_ok());
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let bad = MINIMAL.replace("world =", "wrld =");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 9");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn overrides() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(
            c.with_parameter("alpha_alice", 10.0).unwrap().scenario.alpha_alice,
            10.0
        );
        assert!(c.with_parameter("seed", 1.0).is_err());
    }
}
