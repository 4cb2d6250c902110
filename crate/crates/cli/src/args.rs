use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpm_shapley::{Link, OutcomeKind};

#[derive(Debug, Parser)]
#[command(
    name = "lpm-shapley",
    version,
    about = "Shapley explanations for Gaussian logit/probit models"
)]
pub struct Cli {
    /// Worker threads for sampling; 0 uses all cores. Results do not depend on it.
    #[arg(long, global = true, env = "LPM_SHAPLEY_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explain one sample under each requested outcome.
    Explain(ExplainArgs),
    /// Compare the baselines of all outcomes for a model.
    Baseline(BaselineArgs),
    /// Zero-attribution curves of feature 1 and equal-importance lines.
    Curves(CurvesArgs),
    /// Attributions over a lattice of (x1, x2).
    Grid(GridArgs),
    /// Sign and top-feature disagreement percentages.
    DisagreeStudy(StudyArgs),
    /// Global feature importance and relative ratios.
    ImportanceStudy(StudyArgs),
    /// Baselines across total log-odds variance.
    BaselineSweep(SweepArgs),
    /// Compare closed-form attributions with permutation sampling.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkArg {
    Logit,
    Probit,
}

impl From<LinkArg> for Link {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Logit => Link::Logit,
            LinkArg::Probit => Link::Probit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutcomeArg {
    LogOdds,
    Probability,
    Decision,
}

impl From<OutcomeArg> for OutcomeKind {
    fn from(o: OutcomeArg) -> Self {
        match o {
            OutcomeArg::LogOdds => OutcomeKind::LogOdds,
            OutcomeArg::Probability => OutcomeKind::Probability,
            OutcomeArg::Decision => OutcomeKind::Decision,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutcomeArgs {
    /// Outcome to explain; repeat for several. Defaults to all three.
    #[arg(long = "outcome", value_enum)]
    pub outcomes: Vec<OutcomeArg>,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkArg,
    /// Decision threshold on the log-odds.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eta_star: f64,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    /// Model JSON: intercept, coefficients, means, stddevs.
    #[arg(long)]
    pub model: PathBuf,
    /// Feature values, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub x: Vec<f64>,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub x1_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x1_max: f64,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    pub x2_min: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub x2_max: f64,
    /// Grid points per axis (at least 2).
    #[arg(long, default_value_t = 101)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Normalized two-feature model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    /// x1 bounds give the initial root bracket; x2 bounds and steps the grid.
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Two-feature model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// A study config, or a bundle with shared settings and a `studies` list.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed. Without either, a fresh seed is drawn.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_enum)]
    pub link: Option<LinkArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta_star: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON with `expected_eta`, optional `link` and `variances`.
    #[arg(long, conflicts_with_all = ["expected_eta", "var_min", "var_max", "steps"])]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub expected_eta: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub var_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub var_max: f64,
    /// Log-spaced grid points between the variance bounds.
    #[arg(long, default_value_t = 81)]
    pub steps: usize,
    #[arg(long, value_enum)]
    pub link: Option<LinkArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    pub x: Vec<f64>,
    #[command(flatten)]
    pub outcome: OutcomeArgs,
    /// Sampled permutations.
    #[arg(long, default_value_t = 2000)]
    pub n: u64,
    /// Draws per coalition value along each permutation.
    #[arg(long, default_value_t = 2000)]
    pub inner: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Agreement band in standard errors.
    #[arg(long, default_value_t = 4.0)]
    pub k: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
