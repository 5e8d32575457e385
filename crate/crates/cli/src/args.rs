use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "garch-mcmc",
    version,
    about = "Bayesian GARCH(1,1) estimation by adaptive independence Metropolis-Hastings",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a sampler (the default when no subcommand is given).
    Run(RunArgs),
    /// Compare two finished runs on the same data in a side-by-side report table.
    Compare {
        /// Output directory of the first run.
        a: PathBuf,
        /// Output directory of the second run.
        b: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Adaptive,
    Metropolis,
}

impl SamplerKind {
    /// Row label for the mean line of the report table.
    pub fn label(self) -> &'static str {
        match self {
            SamplerKind::Adaptive => "Adaptive construction",
            SamplerKind::Metropolis => "Metropolis",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Price file with `label,price` rows.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub csv: Option<PathBuf>,

    /// Simulate GARCH(1,1) returns instead of reading prices.
    #[arg(long)]
    pub synthetic: bool,

    #[arg(long, default_value_t = 0.03, requires = "synthetic")]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.94, requires = "synthetic")]
    pub beta: f64,
    #[arg(long, default_value_t = 0.011, requires = "synthetic")]
    pub omega: f64,
    /// Number of synthetic returns.
    #[arg(long, default_value_t = 2000, requires = "synthetic")]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = SamplerKind::Adaptive)]
    pub sampler: SamplerKind,

    #[arg(long = "burn-in", default_value_t = 3000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1000)]
    pub pilot: usize,
    #[arg(long = "refit-interval", default_value_t = 1000)]
    pub refit_interval: usize,
    #[arg(long, default_value_t = 100_000)]
    pub total: usize,

    /// Student's t shape of the proposal.
    #[arg(long, default_value_t = 10.0)]
    pub nu: f64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Initial variance of the recursion: `var` (sample variance) or a number.
    #[arg(long, default_value = "var")]
    pub sigma1: String,

    /// Plateau window factor c in T >= c·τ_int(T).
    #[arg(long = "window-factor", default_value_t = 5.0)]
    pub window_factor: f64,

    /// Initial random-walk window width, shared by all parameters before tuning.
    #[arg(long = "metropolis-d", default_value_t = 0.01)]
    pub metropolis_d: f64,

    #[arg(long, value_name = "DIR", default_value = "garch-run")]
    pub out: PathBuf,

    /// Independent chains to run concurrently.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,

    /// Stop re-fitting the proposal after this many fits.
    #[arg(long = "freeze-after", value_name = "N")]
    pub freeze_after: Option<usize>,

    /// Also write the return series used to `returns.csv`.
    #[arg(long = "dump-returns")]
    pub dump_returns: bool,

    /// Continue the adaptive run in `--out` from its checkpoint up to `--total`.
    #[arg(long)]
    pub resume: bool,
}
