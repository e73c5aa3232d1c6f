use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use considerate_cli::render::{render, render_sweep};
use considerate_cli::run::{prepare_world, run, sweep};
use considerate_cli::{CliError, ExperimentConfig, RunResult};
use log::error;

#[derive(Parser)]
#[command(
    name = "considerate",
    version,
    about = "Solve and inspect considerate-agent gridworld experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config and the world it describes.
    Validate { config: PathBuf },
    /// Solve one config and print the rendered trajectory.
    Solve {
        config: PathBuf,
        /// Write the JSON result here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the config's [sweep] table and print one line per value.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-render a stored result.
    Render { result: PathBuf },
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn execute(cmd: Command) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let world = prepare_world(&cfg)?;
            considerate_cli::run::augment(&cfg, &world)?;
            println!(
                "ok: {} states, {} actions",
                world.base.num_states(),
                world.base.num_actions()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = run(&cfg)?;
            if let Some(path) = output {
                write(&path, &result.to_json())?;
            }
            print!("{}", render(&result));
            if !result.converged {
                error!("solver did not converge");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = sweep(&cfg)?;
            if let Some(path) = output {
                write(&path, &result.to_json())?;
            }
            print!("{}", render_sweep(&result));
            let failed = result
                .rows
                .iter()
                .any(|r| r.result.as_ref().is_none_or(|r| !r.converged));
            Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Render { result } => {
            let r = RunResult::load(&result)?;
            print!("{}", render(&r));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONSIDERATE_LOG", "warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
