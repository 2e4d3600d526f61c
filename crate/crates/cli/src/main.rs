//! `losmimo`: near-field LoS MIMO link analysis from the command line.
//!
//! Exit codes: 0 success (possibly with warnings), 1 domain or computation
//! error, 2 usage error.

mod commands;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use params::{LinkParams, Spacing};

#[derive(Debug, Parser)]
#[command(name = "losmimo", version, about = "Near-field line-of-sight MIMO link analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form and numerical degrees of freedom of one link.
    Dof(LinkArgs),
    /// Synthesize one architecture for a mode count or aperture lengths.
    Design(DesignArgs),
    /// Sweep one link parameter and tabulate metrics.
    Sweep(SweepArgs),
    /// Decompose the channel into modes and export the profiles.
    Modes(ModesArgs),
    /// Compare all architectures at equal aperture.
    Compare(LinkArgs),
    /// Fraunhofer distances and field-region classification.
    Regions(LinkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// Carrier wavelength in meters.
    #[arg(long, conflicts_with = "frequency")]
    wavelength: Option<f64>,
    /// Carrier frequency in hertz.
    #[arg(long)]
    frequency: Option<f64>,
    /// Center-to-center link distance in meters.
    #[arg(long)]
    distance: Option<f64>,
    /// Transmit aperture length in meters.
    #[arg(long)]
    lt: Option<f64>,
    /// Receive aperture length in meters (defaults to --lt).
    #[arg(long)]
    lr: Option<f64>,
    /// Transmit element count.
    #[arg(long)]
    n: Option<usize>,
    /// Receive element count (defaults to --n).
    #[arg(long)]
    m: Option<usize>,
    /// Element spacing: half, optimal or custom:<m>.
    #[arg(long)]
    spacing: Option<Spacing>,
    /// MIMO-line sample pitch in meters (default wavelength/4).
    #[arg(long)]
    sample_spacing: Option<f64>,
    /// Relative power threshold for strongly coupled modes, dB.
    #[arg(long, default_value_t = 20.0)]
    threshold_db: f64,
    /// Geometric near-field threshold as a multiple of the larger aperture.
    #[arg(long, default_value_t = losmimo::geometry::DEFAULT_GEOMETRIC_KAPPA)]
    kappa: f64,
    /// Largest channel matrix, in entries.
    #[arg(long, default_value_t = losmimo::channel::DEFAULT_MAX_ENTRIES)]
    max_entries: usize,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchitectureArg {
    Line,
    Half,
    Optimal,
    Subarray,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Target number of modes (element count of the sparse array).
    #[arg(long, conflicts_with_all = ["lt", "lr"])]
    modes: Option<usize>,
    /// Architecture to build; overrides --spacing.
    #[arg(long, value_enum)]
    architecture: Option<ArchitectureArg>,
    /// Elements per sub-array for --architecture subarray.
    #[arg(long)]
    subarray_elements: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepVariable {
    Distance,
    Wavelength,
    #[value(name = "l_tx")]
    LTx,
    #[value(name = "l_rx")]
    LRx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Metric {
    Eq2,
    Eq3,
    Eq8,
    Eq9,
    Eq10,
    Eq12,
    RankBound,
    #[value(name = "r_ff")]
    Rff,
    Region,
    NTx,
    NRx,
    DofNumerical,
    ParticipationRatio,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    link: LinkArgs,
    #[arg(long, value_enum)]
    variable: SweepVariable,
    #[arg(long)]
    start: f64,
    #[arg(long)]
    stop: f64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    points: u32,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    scale: Scale,
    /// Comma-separated metrics to tabulate.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "eq2")]
    metrics: Vec<Metric>,
}

#[derive(Debug, Clone, Args)]
pub struct ModesArgs {
    #[command(flatten)]
    link: LinkArgs,
    /// Directory receiving intensities.csv and the per-mode profiles.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Export every mode instead of only the strongly coupled ones.
    #[arg(long, conflicts_with = "count")]
    all: bool,
    /// Number of leading modes to export.
    #[arg(long)]
    count: Option<usize>,
}

/// Errors surfaced by the commands, mapped to exit codes in `main`.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<losmimo::Error> for CliError {
    fn from(e: losmimo::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

/// Which link quantities a command cannot do without.
#[derive(Debug, Clone, Copy, Default)]
pub struct Needs {
    pub band: bool,
    pub distance: bool,
    pub lengths: bool,
}

impl LinkArgs {
    /// Resolves flags into numbers. `sweep` supplies the swept quantity later,
    /// so it relaxes the corresponding requirement.
    pub fn resolve(&self, needs: Needs) -> Result<LinkParams, CliError> {
        let wavelength = match (self.wavelength, self.frequency) {
            (Some(w), None) => w,
            (None, Some(f)) => losmimo::geometry::SPEED_OF_LIGHT / f,
            (None, None) if !needs.band => f64::NAN,
            _ => return Err(CliError::Usage("exactly one of --wavelength or --frequency is required".into())),
        };
        let distance = match self.distance {
            Some(d) => d,
            None if !needs.distance => f64::NAN,
            None => return Err(CliError::Usage("--distance is required".into())),
        };
        let l_tx = match self.lt {
            Some(l) => l,
            None if !needs.lengths => f64::NAN,
            None => return Err(CliError::Usage("--lt is required".into())),
        };
        let l_rx = self.lr.unwrap_or(l_tx);
        if self.frequency.is_some_and(|f| !(f.is_finite() && f > 0.0)) {
            return Err(CliError::Failed("frequency must be positive".into()));
        }
        Ok(LinkParams {
            wavelength,
            distance,
            l_tx,
            l_rx,
            n: self.n,
            m: self.m,
            spacing: self.spacing,
            sample_spacing: self.sample_spacing,
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dof(args) => commands::dof(&args),
        Command::Design(args) => commands::design(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Modes(args) => commands::modes(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Regions(args) => commands::regions(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => Cli::command()
            .error(clap::error::ErrorKind::ArgumentConflict, msg)
            .exit(),
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
