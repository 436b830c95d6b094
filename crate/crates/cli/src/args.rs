use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(name = "disclab", version, about = "Digital nets over F2, exact Haar coefficients and discrepancy norms")]
pub struct Cli {
    /// Work budget for the exact algorithms.
    #[arg(long, global = true, default_value_t = 1u128 << 40)]
    pub budget: u128,

    /// Output file (a path stem for `study`); standard output when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Generate a point set from a net, or a random or clustered reference set.
    Gen(GenArgs),
    /// Check the net property, the box point counts and the empty-box count.
    Verify(VerifyArgs),
    /// Exact Haar coefficient table of the discrepancy function.
    Coeffs(CoeffsArgs),
    /// Norms of the discrepancy function.
    Norms(NormsArgs),
    /// Scaling study of a norm over a range of n.
    Study(StudyArgs),
}

/// Where the net or the point set comes from.
#[derive(Args, Debug, Serialize)]
pub struct Source {
    /// Bundled construction (hammersley, sobol, zero).
    #[arg(long, conflicts_with_all = ["matrices", "points"])]
    pub builtin: Option<String>,

    /// Generating-matrix file.
    #[arg(long, conflicts_with = "points")]
    #[serde(skip)]
    pub matrices: Option<PathBuf>,

    /// Point-set file.
    #[arg(long)]
    #[serde(skip)]
    pub points: Option<PathBuf>,

    #[arg(long)]
    pub d: Option<usize>,

    #[arg(long)]
    pub n: Option<usize>,

    /// Order of the net.
    #[arg(long)]
    pub sigma: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub source: Source,

    /// Generate this many uniform random points instead of a net.
    #[arg(long, conflicts_with = "clustered")]
    pub random: Option<usize>,

    /// Generate this many points packed into the box `[0, 2^-spread)^d`.
    #[arg(long)]
    pub clustered: Option<usize>,

    #[arg(long, default_value_t = 4)]
    pub spread: u32,

    /// Bits per coordinate of random and clustered sets.
    #[arg(long, default_value_t = 20)]
    pub precision: u32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: Source,

    /// Declared quality parameter.
    #[arg(long)]
    pub t: Option<u32>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub source: Source,

    /// Largest level per coordinate; precision - 1 when absent.
    #[arg(long)]
    pub max_level: Option<i32>,

    /// Emit every index, not only those with a nonzero counting part.
    #[arg(long)]
    pub all: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Star,
    L2Warnock,
    L2Parseval,
    LpExact,
    LpEstimate,
    OrliczDirect,
    OrliczProxy,
    BmoProxy,
    BmoLowerBound,
}

#[derive(Args, Debug, Serialize)]
pub struct NormsArgs {
    #[command(flatten)]
    pub source: Source,

    /// Norms to compute.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub norms: Vec<NormKind>,

    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 4, 8, 16, 32])]
    pub p_grid: Vec<u32>,

    /// Orlicz exponent; 2/(d-1) when absent.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Samples of the stochastic estimators.
    #[arg(long, default_value_t = 1 << 16)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Largest box order of the BMO candidates; ceil(log2 N) when absent.
    #[arg(long)]
    pub order_cap: Option<u32>,

    /// Leave unions of boxes out of the BMO candidates.
    #[arg(long)]
    pub no_unions: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    BmoProxy,
    OrliczProxy,
    Star,
    L2,
    BmoLowerBound,
}

#[derive(Args, Debug, Serialize)]
pub struct StudyArgs {
    /// Bundled construction.
    #[arg(long, default_value = "hammersley")]
    pub builtin: String,

    #[arg(long)]
    pub d: usize,

    #[arg(long, default_value_t = 1)]
    pub sigma: usize,

    /// Values of n, as `a..b` (inclusive) or a comma-separated list.
    #[arg(long)]
    pub n_range: String,

    #[arg(long, value_enum)]
    pub norm: StudyKind,

    /// Orlicz exponent; 2/(d-1) when absent.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Accepted exponent window `lo,hi`; a default per norm when absent.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("invalid bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("invalid bound {hi:?}"))?;
    if lo > hi {
        return Err("lo must not exceed hi".into());
    }
    Ok((lo, hi))
}
