//! Experiment harness for the considerate-agent library: TOML configs in,
//! JSON results and text renderings out.

pub mod config;
pub mod error;
pub mod render;
pub mod result;
pub mod run;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use result::{RunResult, SweepResult};
