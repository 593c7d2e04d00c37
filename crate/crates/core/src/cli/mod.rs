//! Command-line front end: configuration-driven simulate / calibrate /
//! diagnose / sweep pipelines.
//!
//! Exit codes: 0 success, 2 configuration error (including argument
//! parsing), 3 violated runtime precondition, 4 I/O failure.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_calibrate, cmd_diagnose, cmd_simulate, cmd_sweep, load_calibration, run_calibration,
    run_diagnosis, CalibrationFile, Diagnosis,
};
pub use config::{load_config, parse_config, ScenarioConfig};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "wavesplit",
    version,
    about = "Directed-wave diagnostics for 1+1D hyperbolic systems: simulate, \
             split into directed modes, and solve the single-point inverse problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario; write per-frame states, norms, and a manifest
    Simulate {
        /// Scenario configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output.directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate the detection baseline from a pure right-wave scenario
    Calibrate {
        /// Scenario configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output.directory)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of seeded noise trials
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run the inverse pipeline: detect, reconstruct, localize
    Diagnose {
        /// Scenario configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output.directory)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Calibration file written by `calibrate`
        #[arg(long)]
        calibration: PathBuf,
    },
    /// Run the pipeline over a parameter axis and tabulate residuals
    Sweep {
        /// Scenario configuration file (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output.directory)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter to vary: epsilon, delta1, delta2, beta, noise_sigma,
        /// dx, dt, or points
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Parallel worker threads
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Optional calibration file supplying the detection baseline
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
}

fn resolve_out(cfg: &ScenarioConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from(&cfg.output.directory))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate { config, out } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out(&cfg, out);
            cmd_simulate(&cfg, &dir)
        }
        Command::Calibrate {
            config,
            out,
            trials,
        } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out(&cfg, out);
            cmd_calibrate(&cfg, trials, &dir)
        }
        Command::Diagnose {
            config,
            out,
            calibration,
        } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out(&cfg, out);
            cmd_diagnose(&cfg, &calibration, &dir)
        }
        Command::Sweep {
            config,
            out,
            axis,
            values,
            workers,
            calibration,
        } => {
            let cfg = load_config(&config)?;
            let dir = resolve_out(&cfg, out);
            let calib = calibration.map(|p| load_calibration(&p)).transpose()?;
            cmd_sweep(&cfg, &axis, &values, workers, calib.as_ref(), &dir)
        }
    }
}

/// Binary entry point; maps error categories onto stable exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
