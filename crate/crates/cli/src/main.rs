//! `mcsel`: run selection experiments and oracle checks from the command line.
//!
//! Exit codes: 0 on success, 2 on invalid configuration, 1 on internal
//! failure (I/O errors, failed oracle checks).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcsel_core::csv::{domain_csv, flat_csv};
use mcsel_core::flat::{run_experiment, ExperimentConfig};
use mcsel_core::oracle;
use mcsel_core::tree::{evaluate_tree_policies, BanditTreeSpec, TreeExperimentConfig};
use mcsel_core::{Error, PolicyKind};

#[derive(Debug, Parser)]
#[command(
    name = "mcsel",
    version,
    about = "Value-of-information sampling for Monte Carlo selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flat Bernoulli selection problems; CSV of mean simple regret per policy and budget.
    Flat(FlatArgs),
    /// Synthetic bandit trees searched with VOI at the root and UCT below.
    Tree(TreeArgs),
    /// Run the exact-oracle checks and print a pass/fail report.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Comma-separated sampling budgets, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    budgets: Option<Vec<u64>>,
    /// Number of random problem instances per (policy, budget).
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    /// Master seed; identical seeds give byte-identical output.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long)]
    threads: Option<usize>,
    /// Write output here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FlatArgs {
    /// Number of arms K.
    #[arg(long, default_value_t = 25)]
    arms: usize,
    /// Comma-separated policies: voi, voi-plus, ucb1, round-robin.
    #[arg(long, value_delimiter = ',', default_value = "ucb1,voi,voi-plus")]
    policies: Vec<String>,
    /// Per-sample cost for the VOI policies' stopping rule; 0 disables stopping.
    #[arg(long, default_value_t = 0.0)]
    cost: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct TreeArgs {
    /// Tree depth (1..=4).
    #[arg(long, default_value_t = 2)]
    depth: u32,
    /// Moves per node (1..=8).
    #[arg(long, default_value_t = 5)]
    branching: u32,
    /// Play full episodes with this nominal per-move budget, carrying unused
    /// rollouts forward (replaces --budgets).
    #[arg(long, conflicts_with = "budgets")]
    nominal: Option<u64>,
    /// Comma-separated root policies (ucb1 is plain UCT).
    #[arg(long, value_delimiter = ',', default_value = "ucb1,voi")]
    policies: Vec<String>,
    /// Per-sample cost for the VOI stopping rule; 0 disables stopping.
    #[arg(long, default_value_t = 1e-6)]
    cost: f64,
    /// UCT exploration constant below the root.
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    exploration: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Simulated episodes per policy in the DP dominance check.
    #[arg(long, default_value_t = 100_000)]
    episodes: u64,
    /// Seed for the simulated episodes.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn parse_policies(names: &[String], cost: f64) -> Result<Vec<PolicyKind>, Failure> {
    names
        .iter()
        .map(|n| Ok(n.trim().parse::<PolicyKind>()?.with_cost(cost)?))
        .collect()
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Internal(format!("writing {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Internal(format!("writing stdout: {e}")))
        }
    }
}

fn run_flat(args: FlatArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig {
        arms: args.arms,
        budgets: args
            .common
            .budgets
            .unwrap_or_else(|| mcsel_core::flat::DEFAULT_BUDGETS.to_vec()),
        trials: args.common.trials,
        policies: parse_policies(&args.policies, args.cost)?,
        master_seed: args.common.seed,
    };
    cfg.validate()?;
    let rows = with_threads(args.common.threads, || run_experiment(&cfg))??;
    emit(args.common.output.as_ref(), &flat_csv(&rows))
}

fn run_tree(args: TreeArgs) -> Result<(), Failure> {
    let (budgets, episodes) = match args.nominal {
        Some(n) => (vec![n], true),
        None => (args.common.budgets.unwrap_or_else(|| vec![1000]), false),
    };
    let cfg = TreeExperimentConfig {
        spec: BanditTreeSpec {
            depth: args.depth,
            branching: args.branching,
        },
        budgets,
        trials: args.common.trials,
        policies: parse_policies(&args.policies, args.cost)?,
        cost: args.cost,
        exploration: args.exploration,
        master_seed: args.common.seed,
        episodes,
    };
    cfg.validate()?;
    let rows = with_threads(args.common.threads, || evaluate_tree_policies(&cfg))??;
    emit(args.common.output.as_ref(), &domain_csv("tree", &rows))
}

fn run_oracle(args: OracleArgs) -> Result<(), Failure> {
    if args.episodes < 2 {
        return Err(Failure::Config("--episodes must be at least 2".into()));
    }
    let checks = with_threads(args.threads, || {
        oracle::run_checks(args.episodes, args.seed)
    })?
    .map_err(|e| Failure::Internal(e.to_string()))?;
    emit(args.output.as_ref(), &oracle::format_report(&checks))?;
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Internal("oracle checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Flat(a) => run_flat(a),
        Command::Tree(a) => run_tree(a),
        Command::OracleCheck(a) => run_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
