use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vnfscale", version, about = "Analyze, optimize and simulate a legacy server block with auto-scaled instances")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration exactly.
    Solve(SolveArgs),
    /// Solve over a grid of one parameter, optionally for several series.
    Sweep(SweepArgs),
    /// Choose the number of dynamic instances k.
    Optimize(OptimizeArgs),
    /// Run the discrete-event simulator.
    Simulate(SimulateArgs),
    /// Simulate and check the exact metrics against the confidence intervals.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file with optional `params`, `sim` and `cost` sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// System parameters other than k. Unset values come from the config file,
/// then from the defaults n0=110, mu=1, alpha=0.005, K=250.
#[derive(Debug, Args, Default, Clone)]
pub struct BaseFlags {
    /// Arrival rate (jobs/s).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Service rate per server (jobs/s).
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Setup rate of a dynamic instance (1/s).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Always-on legacy servers.
    #[arg(long, allow_negative_numbers = true)]
    pub n0: Option<i64>,
    /// System capacity (jobs waiting plus in service).
    #[arg(long = "K", allow_negative_numbers = true)]
    pub capacity: Option<i64>,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ParamFlags {
    #[command(flatten)]
    pub base: BaseFlags,
    /// Number of dynamic instances.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<i64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Lambda,
    Mu,
    Alpha,
    N0,
    K,
    #[value(name = "K")]
    Capacity,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Mu => "mu",
            SweepParam::Alpha => "alpha",
            SweepParam::N0 => "n0",
            SweepParam::K => "k",
            SweepParam::Capacity => "K",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, SweepParam::N0 | SweepParam::K | SweepParam::Capacity)
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Parameter on the x axis.
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub step: f64,
    /// Parameter that distinguishes series, e.g. `--series-param k`.
    #[arg(long, value_enum, requires = "series")]
    pub series_param: Option<SweepParam>,
    /// Values of the series parameter, comma separated.
    #[arg(long, value_delimiter = ',', requires = "series_param", allow_negative_numbers = true)]
    pub series: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub base: BaseFlags,
    /// Threshold on (S/s_bar)/(Wq/wq_bar); selects the threshold walk.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["w1", "w2", "wq_limit"])]
    pub delta: Option<f64>,
    /// S normalizer for the threshold walk (default K - n0).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["w1", "w2", "wq_limit"])]
    pub s_bar: Option<f64>,
    /// Wq normalizer for the threshold walk (default Wq at k = 0).
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["w1", "w2", "wq_limit"])]
    pub wq_bar: Option<f64>,
    /// Weight on Wq; selects cost minimization over every k.
    #[arg(long, allow_negative_numbers = true)]
    pub w1: Option<f64>,
    /// Weight on S.
    #[arg(long, allow_negative_numbers = true)]
    pub w2: Option<f64>,
    /// Only k with Wq below this are feasible.
    #[arg(long, allow_negative_numbers = true)]
    pub wq_limit: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Default, Clone)]
pub struct SimFlags {
    /// Simulated seconds per replication.
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Seconds discarded at the start of each replication (default 10% of the horizon).
    #[arg(long, allow_negative_numbers = true)]
    pub warmup: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// exp, det, erlang:<n>, uniform:<spread>, normal:<cv>, pareto:<shape>
    #[arg(long)]
    pub arrival_dist: Option<String>,
    #[arg(long)]
    pub service_dist: Option<String>,
    #[arg(long)]
    pub setup_dist: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[command(flatten)]
    pub sim: SimFlags,
    /// Exit with status 3 unless every exact value is inside its interval.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub common: Common,
}
