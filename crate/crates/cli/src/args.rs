use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use yule_core::{Backend, BuildMode};

#[derive(Debug, Clone, Parser, Serialize, Deserialize)]
#[command(name = "yule", version, about = "Moments and coupling experiments for the correlation of independent random walks")]
pub struct Cli {
    /// Cap on the worker pool (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// How `d_n` is evaluated.
    #[arg(long, global = true, value_enum, default_value_t = KernelMode::Explicit)]
    pub kernel_mode: KernelMode,

    /// Write a run manifest to this path (default: `<out>.manifest.json` when an output file is written).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Explicit,
    Lu,
    Spectral,
}

impl From<KernelMode> for BuildMode {
    fn from(m: KernelMode) -> Self {
        match m {
            KernelMode::Explicit => BuildMode::ExplicitFormula,
            KernelMode::Lu => BuildMode::DeterminantLu,
            KernelMode::Spectral => BuildMode::Spectral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendArg {
    Series,
    Closed,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Series => Backend::SeriesSpectral,
            BackendArg::Closed => Backend::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Table1,
    Table2,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// E[θ_n^m] or the continuous-limit moment.
    Moment(MomentArgs),
    /// Regenerate a table of moments as CSV.
    Table(TableArgs),
    /// Coupled simulation of (θ_n, θ) on shared paths.
    Simulate(SimulateArgs),
    /// L¹ distance against n and its log-log slope.
    Rate(RateArgs),
    /// The constants C1..C5 and the d_n lower-bound checks.
    Bounds(BoundsArgs),
    /// d_n(λ) = det(I − λK_n).
    Charpoly(CharpolyArgs),
    /// Joint moment generating function φ_n(s11, s12, s22).
    Mgf(MgfArgs),
    /// Re-run a manifest and compare its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MomentArgs {
    #[arg(long, required_unless_present = "continuous", conflicts_with = "continuous")]
    pub n: Option<usize>,
    #[arg(long)]
    pub continuous: bool,
    #[arg(long)]
    pub order: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub rel_tol: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Series)]
    pub backend: BackendArg,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1e-7)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub fine_factor: usize,
    #[arg(long, default_value_t = 100_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
    /// Per-replicate CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RateArgs {
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400,800")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub fine_factor: usize,
    #[arg(long, default_value_t = 200_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 500)]
    pub scan_max: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CharpolyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MgfArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s11: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s12: f64,
    #[arg(long)]
    pub s22: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest_path: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Moment(_) => "moment",
            Command::Table(_) => "table",
            Command::Simulate(_) => "simulate",
            Command::Rate(_) => "rate",
            Command::Bounds(_) => "bounds",
            Command::Charpoly(_) => "charpoly",
            Command::Mgf(_) => "mgf",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Table(a) => Some(&a.out),
            Command::Simulate(a) => a.out.as_ref(),
            Command::Rate(a) => a.out.as_ref(),
            Command::Bounds(a) => a.out.as_ref(),
            _ => None,
        }
    }

    pub fn out_path_mut(&mut self) -> Option<&mut PathBuf> {
        match self {
            Command::Table(a) => Some(&mut a.out),
            Command::Simulate(a) => a.out.as_mut(),
            Command::Rate(a) => a.out.as_mut(),
            Command::Bounds(a) => a.out.as_mut(),
            _ => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Simulate(a) => Some(a.seed),
            Command::Rate(a) => Some(a.seed),
            _ => None,
        }
    }
}
