use clap::{Args, Parser, Subcommand};
use corners::cli::{resolve_config, run, CommandKind, PartialConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Beta-Krawtchouk corners process toolkit: exact enumeration, MCMC
/// sampling, and numerical verification of the asymptotic predictions.
#[derive(Parser)]
#[command(name = "corners", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Jack parameter theta = beta/2 (> 0)
    #[arg(long)]
    theta: Option<f64>,
    /// Box width K
    #[arg(long = "K")]
    k: Option<u32>,
    /// Number of levels N
    #[arg(long = "N")]
    n: Option<u32>,
    /// RNG seed (chains derive independent streams from it)
    #[arg(long)]
    seed: Option<u64>,
    /// Snapshots per chain
    #[arg(long)]
    samples: Option<u32>,
    /// Burn-in sweeps (default 20K)
    #[arg(long)]
    burnin: Option<u32>,
    /// Sweeps between snapshots (default K)
    #[arg(long)]
    thin: Option<u32>,
    /// Number of parallel chains
    #[arg(long)]
    chains: Option<u32>,
    /// Levels to record/evaluate (comma separated)
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<u32>>,
    /// Grid resolution for tables
    #[arg(long)]
    grid: Option<u32>,
    /// Tolerance override for verification checks
    #[arg(long)]
    tol: Option<f64>,
    /// JSON config file; flags take precedence over its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all configurations with weights and probabilities (CSV)
    Enumerate(CommonArgs),
    /// Sample the measure by heat-bath MCMC (JSON lines)
    Sample(CommonArgs),
    /// Exact finite-size checks: Z, marginals, Jack weights, Nekrasov
    VerifyExact(CommonArgs),
    /// Closed-form identity suite and covariance cross-checks
    VerifyAnalytic(CommonArgs),
    /// Law-of-large-numbers check of the sampled height function
    VerifyLln(CommonArgs),
    /// Central-limit check of height pairings against the GFF prediction
    VerifyClt(CommonArgs),
    /// Emit density/limit-shape and covariance tables (CSV)
    Kernel(CommonArgs),
}

impl Command {
    fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Enumerate(a) => (CommandKind::Enumerate, a),
            Command::Sample(a) => (CommandKind::Sample, a),
            Command::VerifyExact(a) => (CommandKind::VerifyExact, a),
            Command::VerifyAnalytic(a) => (CommandKind::VerifyAnalytic, a),
            Command::VerifyLln(a) => (CommandKind::VerifyLln, a),
            Command::VerifyClt(a) => (CommandKind::VerifyClt, a),
            Command::Kernel(a) => (CommandKind::Kernel, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let flags = PartialConfig {
        theta: args.theta,
        k: args.k,
        n: args.n,
        seed: args.seed,
        samples: args.samples,
        burnin: args.burnin,
        thin: args.thin,
        chains: args.chains,
        levels: args.levels,
        grid: args.grid,
        tol: args.tol,
        out: args.out,
    };
    let cfg = match resolve_config(kind, flags, args.config.as_ref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            if outcome.exit_code == 0 {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed checks: {}", outcome.failures.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
