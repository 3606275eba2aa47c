//! `daqsim` command-line driver.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 when a numerical method
//! fails to converge, 1 for anything else (for example an unwritable output
//! directory).

mod commands;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use daqsim_core::evolution::EvolutionMode;
use daqsim_core::problem::ProblemKind;
use daqsim_core::Sampling;

#[derive(Debug, Parser)]
#[command(
    name = "daqsim",
    version,
    about = "Digitized adiabatic evolution of spin chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one problem and write its final distribution and metrics.
    Evolve(EvolveArgs),
    /// Run a named experiment preset.
    Preset(PresetArgs),
    /// Compile a problem's digital schedule into native gates.
    Compile(CompileArgs),
    /// Minimum spectral gap of the interpolation path.
    Gap(GapArgs),
    /// Order-of-magnitude time, step and gate estimates.
    Resources(ResourcesArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ProblemSource {
    /// Problem document (JSON).
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
    /// Built-in reference instance.
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct ScheduleArgs {
    /// Total evolution time.
    #[arg(long = "T", value_name = "TIME")]
    pub total_time: Option<f64>,
    /// Number of Trotter steps.
    #[arg(long, value_name = "M")]
    pub steps: Option<usize>,
    /// Where each step samples the schedule.
    #[arg(long, value_parser = parse_sampling)]
    pub sampling: Option<Sampling>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "daqsim-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, default_value = "digital", value_parser = parse_mode)]
    pub mode: EvolutionMode,
    /// Restrict conditional phases to the hardware window (gates mode).
    #[arg(long)]
    pub constrained: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// One of ghz-fig2, scaling-fig3, degeneracy-fig4, random-fig5,
    /// instances-tableS10.
    pub name: String,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// First generator seed; instances use consecutive seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Instances per (size, kind) cell.
    #[arg(long)]
    pub count: Option<usize>,
    /// Chain sizes to run, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sites: Vec<usize>,
    /// Restrict random instances to one kind.
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<ProblemKind>,
    /// Chain coupling of the scaling and degeneracy presets.
    #[arg(long, allow_hyphen_values = true)]
    pub coupling: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub constrained: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Number of points of the uniform grid on s ∈ [0, 1].
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ResourcesArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Target accuracy.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_sampling(s: &str) -> Result<Sampling, String> {
    s.parse().map_err(|e: daqsim_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<EvolutionMode, String> {
    s.parse().map_err(|e: daqsim_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse().map_err(|e: daqsim_core::Error| e.to_string())
}

/// Error caused by the user's input rather than by the computation.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<daqsim_core::Error>() {
            return if e.is_numerical() { 3 } else { 2 };
        }
        if cause.is::<InputError>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Evolve(a) => commands::evolve(&a, &argv),
        Command::Preset(a) => presets::run(&a, &argv),
        Command::Compile(a) => commands::compile(&a, &argv),
        Command::Gap(a) => commands::gap(&a, &argv),
        Command::Resources(a) => commands::resources(&a, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
