//! Scenario files, run artifacts, plots and the `dtamp` command line.

pub mod artifacts;
pub mod commands;
pub mod error;
pub mod plot;
pub mod scenario_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use dtamp::constraints::Family;
use dtamp::solver::InitStrategy;

pub use error::{CliError, ExitStatus, ParseError};

/// Environment variable holding the log filter, e.g. `debug` or
/// `dtamp::solver=debug`.
pub const LOG_ENV: &str = "DTAMP_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "dtamp",
    version,
    about = "Trajectory optimization with differentiable task assignment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitPreset {
    HoldThenGoal,
    Linear,
    MultiObject,
}

impl From<InitPreset> for InitStrategy {
    fn from(p: InitPreset) -> Self {
        match p {
            InitPreset::HoldThenGoal => InitStrategy::HoldThenGoal,
            InitPreset::Linear => InitStrategy::Linear,
            InitPreset::MultiObject => InitStrategy::MultiObject,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a scenario and write trajectories, schedules, convergence and summary.
    Solve {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "max-iters")]
        max_iters: Option<usize>,
        /// Seeds a small jitter of the initial association weights.
        #[arg(long)]
        seed: Option<u64>,
        /// Initialization strategy; overrides `solver.initialization`.
        #[arg(long, value_enum)]
        preset: Option<InitPreset>,
        /// Evaluate blocks on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Compare every analytic Jacobian against central finite differences.
    Check {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 10)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corrupt one family's Jacobian to exercise the harness.
        #[arg(long = "perturb-family", hide = true, value_parser = parse_family)]
        perturb_family: Option<Family>,
    },
    /// Print variable counts and residual block/sample counts.
    Info {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Render SVG plots from the CSVs of a solve run.
    Plot {
        dir: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Print (or write) the scenario file of a built-in scenario.
    Preset {
        name: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
        format!("unknown family `{s}`; expected one of {}", names.join(", "))
    })
}

pub fn execute(command: &Command, out: &mut dyn std::io::Write) -> error::Result<()> {
    match command {
        Command::Solve {
            scenario,
            out: dir,
            max_iters,
            seed,
            preset,
            sequential,
        } => commands::solve(
            &commands::SolveArgs {
                scenario: scenario.clone(),
                out: dir.clone(),
                max_iters: *max_iters,
                seed: *seed,
                init: preset.map(Into::into),
                sequential: *sequential,
            },
            out,
        ),
        Command::Check {
            scenario,
            tol,
            states,
            seed,
            perturb_family,
        } => commands::check(
            &commands::CheckArgs {
                scenario: scenario.clone(),
                tol: *tol,
                states: *states,
                seed: *seed,
                perturb: *perturb_family,
            },
            out,
        ),
        Command::Info { scenario, json } => commands::info(scenario, *json, out),
        Command::Plot { dir, output } => commands::plot(dir, output, out),
        Command::Preset { name, output } => commands::preset(name, output.as_deref(), out),
    }
}
