//! `kerrcat` command-line front end.

mod commands;
mod config;
mod output;
mod tau;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use crate::config::Config;
use crate::tau::Tau;

#[derive(Parser, Debug)]
#[command(name = "kerrcat", version, about = "Kerr cat states, Wigner functions and trapped-ion pulse synthesis")]
struct Cli {
    /// Flat `key = value` config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a coherent state through the Kerr medium and write the state.
    KerrEvolve(KerrEvolveArgs),
    /// Quadrature variance curve over a range of tau.
    Quadratures(QuadraturesArgs),
    /// Sample the Wigner function on a phase-space grid.
    WignerGrid(WignerGridArgs),
    /// Decompose a fractional revival into coherent states.
    Decompose(DecomposeArgs),
    /// Kept probability versus cutoff M for a list of amplitudes.
    TruncationScan(TruncationScanArgs),
    /// Synthesize, verify and export a carrier / red-sideband pulse schedule.
    Synth(SynthArgs),
    /// Forward-simulate a schedule file from the ground state.
    Simulate(SimulateArgs),
}

/// Complex amplitude given as `re` or `re,im`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplitude(pub C64);

impl FromStr for Amplitude {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("expected re or re,im, got {s:?}"));
        let z = match s.split_once(',') {
            Some((re, im)) => C64::new(parse(re)?, parse(im)?),
            None => C64::new(parse(s)?, 0.0),
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err("must be finite".into());
        }
        Ok(Amplitude(z))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Csv,
    Json,
    Gnuplot,
}

impl FromStr for GridFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <GridFormat as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VarianceMethod {
    Numeric,
    ClosedForm,
}

impl FromStr for VarianceMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <VarianceMethod as ValueEnum>::from_str(s, true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    FixedRabi,
    FixedDuration,
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <ModeArg as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug)]
pub struct KerrEvolveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Amplitude>,
    /// Float or exact "p/q pi".
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<Tau>,
    /// Fock dimension; defaults to ceil(|a|^2 + 8|a| + 20).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Keep only levels 0..=M (renormalized).
    #[arg(long)]
    pub truncate: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QuadraturesArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Amplitude>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: Option<Tau>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<Tau>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<VarianceMethod>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct WignerGridArgs {
    /// State JSON file instead of alpha/tau.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Amplitude>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<Tau>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub truncate: Option<usize>,
    /// x_min,x_max,y_min,y_max; defaults to +-(|alpha| + 3.5).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<GridFormat>,
    /// Also evaluate the Kerr double series and report the difference.
    #[arg(long)]
    pub both_methods: bool,
    /// Relative tolerance of the Kerr series.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Amplitude>,
    /// Exact "p/q pi" form required.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<Tau>,
    #[arg(long, value_enum)]
    pub format: Option<GridFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TruncationScanArgs {
    /// Comma-separated amplitudes.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Kept-probability threshold used for the summary.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Target state JSON file instead of alpha/tau/m.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Amplitude>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<Tau>,
    /// Fock cutoff M of the target.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub carrier_rabi: Option<f64>,
    #[arg(long)]
    pub red_rabi: Option<f64>,
    /// Pulse duration in seconds for fixed-duration mode.
    #[arg(long)]
    pub duration: Option<f64>,
    /// 1: theta = Omega t, 2: theta = Omega t / 2.
    #[arg(long)]
    pub convention_factor: Option<u8>,
    /// Schedule JSON path; the table and report are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Target state JSON to compare against.
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> anyhow::Result<()> {
        let cfg = Config::load(cli.config.as_deref())?;
        match &cli.command {
            Command::KerrEvolve(a) => commands::kerr_evolve(a, &cfg),
            Command::Quadratures(a) => commands::quadratures(a, &cfg),
            Command::WignerGrid(a) => commands::wigner_grid(a, &cfg),
            Command::Decompose(a) => commands::decompose(a, &cfg),
            Command::TruncationScan(a) => commands::truncation_scan(a, &cfg),
            Command::Synth(a) => commands::synth(a, &cfg),
            Command::Simulate(a) => commands::simulate(a, &cfg),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
