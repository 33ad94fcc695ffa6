//! `listdtr` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 a regime
//! was infeasible and `--strict` was given.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Infeasible(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
        }
    }
}

impl From<listdtr::Error> for CliError {
    fn from(e: listdtr::Error) -> Self {
        use listdtr::Error as E;
        match e {
            E::Config(_) | E::Argument(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "listdtr", version, about = "Cost-constrained list-based treatment regimes")]
pub struct Cli {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Treat an infeasible regime as fatal (exit code 4).
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a cohort and write it as CSV with a JSON sidecar.
    Simulate(SimulateArgs),
    /// Fit one regime per budget and a ladder summary.
    Fit(FitArgs),
    /// Monte Carlo evaluation of a regime or a fitted ladder.
    Evaluate(EvaluateArgs),
    /// Select the most cost-effective regime from ladder summaries.
    Cea(CeaArgs),
    /// Replicated simulate / fit / evaluate runs in the shape of the reference table.
    Reproduce(ReproduceArgs),
    /// Stability of fitted regimes under a change of learner seed.
    SeedSensitivity(SeedSensitivityArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct LearnerArgs {
    /// `ols` or `stumps`.
    #[arg(long)]
    pub learner: Option<String>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// Row fraction per boosting round (below 1 makes fits seed-dependent).
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Fit one model per action.
    #[arg(long)]
    pub stratified: Option<bool>,
    #[arg(long)]
    pub interactions: Option<bool>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct RegimeArgs {
    /// Comma-separated total budgets, `inf` for none.
    #[arg(long)]
    pub tau: Option<String>,
    /// Comma-separated per-interval budget weights (even split by default).
    #[arg(long)]
    pub schedule: Option<String>,
    /// Maximum clauses per interval list.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Reward per unit share of newly covered units.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Feature preset: markov, current or all.
    #[arg(long)]
    pub features: Option<String>,
    #[command(flatten)]
    pub learner: LearnerArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// low, med or high.
    #[arg(long)]
    pub corr: Option<String>,
    /// Assign treatment with this regime instead of the propensity model.
    #[arg(long)]
    pub regime: Option<PathBuf>,
    /// Output CSV (default: <out-dir>/data.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub regime: RegimeArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// A regime JSON file.
    #[arg(long, conflicts_with = "ladder")]
    pub regime: Option<PathBuf>,
    /// A ladder summary written by `fit`.
    #[arg(long)]
    pub ladder: Option<PathBuf>,
    /// Monte Carlo cohort size.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long)]
    pub corr: Option<String>,
}

#[derive(Args, Debug)]
pub struct CeaArgs {
    /// Ladder summaries (as written by `fit` or `evaluate`).
    #[arg(long)]
    pub summaries: PathBuf,
    /// Willingness to pay per unit of effectiveness.
    #[arg(long)]
    pub wtp: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// low, med, high or all.
    #[arg(long)]
    pub level: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub mc: Option<usize>,
    #[command(flatten)]
    pub regime: RegimeArgs,
}

#[derive(Args, Debug)]
pub struct SeedSensitivityArgs {
    #[arg(long)]
    pub level: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[command(flatten)]
    pub regime: RegimeArgs,
}

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads.or(file.threads) {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let ctx = commands::Context::new(&cli, file)?;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Cea(a) => commands::cea(&ctx, a),
        Command::Reproduce(a) => commands::reproduce(&ctx, a),
        Command::SeedSensitivity(a) => commands::seed_sensitivity(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("listdtr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
