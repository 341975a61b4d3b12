//! Command-line harness: load a scenario, solve, analyze and write
//! CSV, JSON and SVG artifacts.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
pub use config::{load, Overrides, Scenario};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pyramid-eq", version, about = "Steady-state education and labor matching equilibria")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[outputs] dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Grid size; overrides `grid_n`.
    #[arg(long, global = true, value_name = "INT")]
    pub grid_n: Option<usize>,
    /// Steady-state perturbation; overrides `[solver] delta`.
    #[arg(long, global = true, value_name = "FLOAT", allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for wages and matchings.
    Solve,
    /// Integral guru hierarchy for `[gurus]`.
    Gurus,
    /// Asymptotics near the top skill.
    Phase {
        /// Solve first instead of reading prior artifacts.
        #[arg(long)]
        solve: bool,
    },
    /// Solve over the `[sweep]` lattice of (N, theta).
    Sweep,
    /// Check the scenario file without solving.
    Validate,
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Input("--config PATH is required".into()))?;
    let overrides = Overrides { grid_n: cli.grid_n, delta: cli.delta, out: cli.out.clone() };
    let sc = load(path, &overrides)?;
    let log = commands::Log { quiet: cli.quiet };
    match &cli.command {
        Command::Solve => commands::solve(&sc, log).map(|(code, _)| code),
        Command::Gurus => commands::gurus(&sc, log),
        Command::Phase { solve } => commands::phase(&sc, *solve, log),
        Command::Sweep => commands::sweep(&sc, log),
        Command::Validate => commands::validate(&sc, log),
    }
}
