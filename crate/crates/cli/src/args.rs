use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sfa_core::{Mask, Precision};

#[derive(Debug, Parser)]
#[command(name = "sfa", version, about = "Sparse feature attention harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: CommonOpts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the oracle-equivalence suite and exit non-zero on any violation.
    Check(CheckArgs),
    /// Time dense attention and FlashSFA over a sweep and report counters.
    Bench(BenchArgs),
    /// Compare analytic gradients against five-point finite differences.
    GradCheck(GradCheckArgs),
    /// Top-k load-balance entropy and effective rank per head.
    Analyze(AnalyzeArgs),
    /// Print the analytic edge, FLOP and memory models.
    CostModel(CostModelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by every subcommand. List-valued options take
/// comma-separated values and define a sweep.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonOpts {
    /// Read `key = value` defaults from a file; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Sequence length(s).
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Query/key feature dimension(s).
    #[arg(long, global = true, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// Value dimension(s); defaults to `d`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub dv: Option<Vec<usize>>,
    /// Features kept per row by Top-k.
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub heads: Option<usize>,
    #[arg(long, global = true)]
    pub batch: Option<usize>,
    #[arg(long, global = true, value_parser = parse_from_str::<Mask>)]
    pub mask: Option<Mask>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub tile_rows: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub tile_cols: Option<Vec<usize>>,
    #[arg(long, global = true, value_parser = parse_from_str::<Precision>)]
    pub precision: Option<Precision>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Timed iterations per sweep point.
    #[arg(long, global = true)]
    pub repeat: Option<usize>,
    /// Untimed iterations before timing starts.
    #[arg(long, global = true)]
    pub warmup: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

fn parse_from_str<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

#[derive(Debug, Clone, Default, Args)]
pub struct CheckArgs {
    /// Corrupt the FlashSFA output before comparison (negative control).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    /// Skip timing; report only the deterministic counters.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GradCheckArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Gaussian inputs; Top-k supports are close to uniform.
    Gaussian,
    /// Every row keeps the same `k` features.
    FixedSupport,
    /// Orthonormal rank-`r` construction with equal singular values.
    LowRank,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Synthesize one matrix per head.
    #[arg(long, value_enum)]
    pub generator: Option<Generator>,
    /// Matrix files to analyze, one per head (dense or CSR).
    #[arg(long, value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// Energy fraction for the effective rank.
    #[arg(long, default_value_t = 0.9)]
    pub tau: f64,
    /// Rank of the low-rank generator.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CostModelArgs {
    #[arg(long, default_value_t = 2)]
    pub val_bytes: u64,
    #[arg(long, default_value_t = 1)]
    pub idx_bytes: u64,
    #[arg(long, default_value_t = 4)]
    pub ptr_bytes: u64,
}
