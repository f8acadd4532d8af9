use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rmtwist", version, about = "Random-matrix statistics of quadratic twists of elliptic curves")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with defaults for any flag; flags given here win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files and `manifest.json`. Without it, CSV goes to
    /// stdout and the manifest to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Extra curve registry (TOML `[[curve]]` tables).
    #[arg(long, global = true)]
    pub curves: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments M(N, k) of det(U − I) over SO(2N) and the constants g_k.
    Moments(MomentsArgs),
    /// The value density P(N, x) on a grid.
    Density(DensityArgs),
    /// Monte-Carlo samples of det(U − I).
    Sample(SampleArgs),
    /// The arithmetic factor a_k(E).
    Afactor(AfactorArgs),
    /// Central values of the quadratic twists of a curve.
    Scan(ScanCmd),
    /// Family statistics.
    Report {
        #[command(subcommand)]
        kind: ReportKind,
    },
    /// Re-runs a recorded manifest and checks the output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum ReportKind {
    /// Ratio of vanishing counts split by χ_d(p).
    Rp(RpArgs),
    /// Ratio of Σ L^k split by χ_d(p).
    Qp(QpArgs),
    /// Prime-twist vanishing counts over T^{3/4} (ln T)^{-5/8}.
    Conj1(Conj1Args),
    /// All-twist vanishing counts over their predicted growth.
    Eq23(Eq23Args),
    /// Histogram of rescaled central values against P(N, x).
    Hist(HistArgs),
    /// Family moment of L^k against the random-matrix prediction.
    Moment(MomentArgs),
}

/// Comma-separated values.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|v| v.trim().parse::<T>().map_err(|_| format!("cannot parse {v:?}")))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Comma-separated N values.
    #[arg(long = "N", default_value = "1")]
    pub n: List<u32>,
    /// Comma-separated real orders k.
    #[arg(long, default_value = "0,1,2")]
    pub k: List<f64>,
    /// Print g_k by the product and the Barnes formulas instead.
    #[arg(long)]
    pub gk: Option<u32>,
    /// Cross-check the two g_k formulas for k = 1..8.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 0.0)]
    pub xmin: f64,
    /// Defaults to 4^N, the top of the support.
    #[arg(long)]
    pub xmax: Option<f64>,
    /// Number of cells; `x` is each cell's midpoint.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report empirical moments of these orders.
    #[arg(long)]
    pub k: Option<List<f64>>,
    /// Report a histogram with this many bins.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Upper edge of the histogram (default 4^N).
    #[arg(long)]
    pub xmax: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AfactorArgs {
    #[arg(long, default_value = "E11")]
    pub curve: String,
    #[arg(long, default_value = "1")]
    pub k: List<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub cutoff: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Odd,
    All,
    /// Odd for the theta engine, all otherwise.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Even,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DsignArg {
    Negative,
    Positive,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Series,
    Theta,
    Import,
    /// Theta for the congruent-number curve, series otherwise.
    Auto,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "E11")]
    pub curve: String,
    /// Root number, for registry curves that leave it open.
    #[arg(long)]
    pub root_number: Option<i64>,
    #[arg(long, default_value_t = 1)]
    pub dmin: u64,
    #[arg(long, value_enum, default_value_t = ParityArg::Auto)]
    pub parity: ParityArg,
    /// Sign of the functional equation.
    #[arg(long, value_enum, default_value_t = SignArg::Even)]
    pub sign: SignArg,
    /// Sign of d. Defaults to both for `scan` and for theta-engine reports,
    /// to negative for other reports.
    #[arg(long, value_enum)]
    pub dsign: Option<DsignArg>,
    #[arg(long)]
    pub prime_only: bool,
    /// Keep only d with χ_d(p) = value, given as `p:value`.
    #[arg(long)]
    pub chi: Option<String>,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
    #[arg(long, default_value_t = rmtwist::lvalue_engine::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Zero when c < τ(d).
    #[arg(long)]
    pub tau_refined: bool,
    /// Fixed κ instead of calibration.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Largest |d| of the calibration references.
    #[arg(long, default_value_t = 1500)]
    pub calibration_dmax: u64,
    /// Coefficient file for the import engine.
    #[arg(long)]
    pub import: Option<PathBuf>,
    /// Theta-table memory cap in bytes.
    #[arg(long, default_value_t = rmtwist::lvalue_engine::DEFAULT_MEMORY_BUDGET)]
    pub memory_budget: u64,
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long, default_value_t = 1000)]
    pub dmax: u64,
}

#[derive(Debug, Args)]
pub struct RpArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long = "T", default_value_t = 100_000)]
    pub t: u64,
    #[arg(long, default_value = "3,5,7,11,13")]
    pub p: List<u64>,
}

#[derive(Debug, Args)]
pub struct QpArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long = "T", default_value_t = 100_000)]
    pub t: u64,
    #[arg(long, default_value = "3,5,7,13")]
    pub p: List<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct Conj1Args {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long = "T", default_value_t = 200_000)]
    pub t: u64,
    #[arg(long, default_value_t = 20)]
    pub grid_points: u64,
}

#[derive(Debug, Args)]
pub struct Eq23Args {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long = "T", default_value_t = 1_000_000)]
    pub t: u64,
    /// Smallest T of the doubling grid.
    #[arg(long, default_value_t = 1000)]
    pub grid_min: u64,
    /// Primes up to this enter a_{-1/2}.
    #[arg(long, default_value_t = 100_000)]
    pub ak_cutoff: u64,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long = "T", default_value_t = 100_000)]
    pub t: u64,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    #[arg(long, default_value_t = 8.0)]
    pub xmax: f64,
    /// N of the model density (default round(ln T)).
    #[arg(long = "N")]
    pub n: Option<u32>,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long = "T", default_value_t = 100_000)]
    pub t: u64,
    #[arg(long, default_value = "1")]
    pub k: List<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub ak_cutoff: u64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
