//! `vbqc`: experiment runner and verification harness for the
//! measurement-only verifiable blind computing simulator.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 configuration error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use vbqc_cli::commands::{self, Overrides, SweepAxis};
use vbqc_cli::config::{ExperimentConfig, Mode, OutputFormat};
use vbqc_cli::{checks, CliError};

#[derive(Parser)]
#[command(
    name = "vbqc",
    about = "Simulate and verify a measurement-only verifiable blind quantum computing protocol",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct CommonArgs {
    /// Experiment configuration (TOML). Omitted: the built-in default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override; per-trial streams derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial-count override.
    #[arg(long)]
    trials: Option<usize>,
    /// sample: Monte-Carlo trials; exact: closed-form probabilities.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Output format override.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output path override (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit a result record.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write per-trial records (trial, branch, accepted, digest).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run one record per grid point along a parameter axis.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Parameter to sweep.
        #[arg(long, value_enum)]
        axis: SweepAxis,
        /// Comma-separated grid values.
        #[arg(long)]
        values: String,
    },
    /// Execute the registered invariant suite; exit 1 on any failure.
    VerifyBounds {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the exhaustive twirl verification suite at m = 1.
    TwirlCheck {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    match &common.config {
        Some(path) => ExperimentConfig::load(path),
        None => Ok(ExperimentConfig::default_experiment()),
    }
}

fn overrides(common: &CommonArgs, trace: Option<PathBuf>) -> Overrides {
    Overrides {
        seed: common.seed,
        trials: common.trials,
        mode: common.mode,
        format: common.format,
        out: common.out.clone(),
        trace,
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common, trace } => {
            let cfg = load_config(&common)?;
            commands::cmd_run(&cfg, &overrides(&common, trace))
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let cfg = load_config(&common)?;
            commands::cmd_sweep(&cfg, &overrides(&common, None), axis, &values)
        }
        Command::VerifyBounds { common } => {
            let cfg = load_config(&common)?;
            checks::cmd_verify_bounds(&cfg, common.seed.unwrap_or(cfg.seed))
        }
        Command::TwirlCheck { common } => {
            let cfg = load_config(&common)?;
            checks::cmd_twirl_check(&cfg, common.seed.unwrap_or(cfg.seed))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {}", err.message);
        std::process::exit(err.exit_code());
    }
}
