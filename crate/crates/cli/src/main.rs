//! Command-line entry point: generate instance pools, train
//! streamliner/model portfolios, and evaluate them on unseen instances.
//!
//! Exit codes: 0 success, 1 usage error, 2 input validation error,
//! 3 internal error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use streamline_core::error::Error;
use streamline_core::pipeline::{
    evaluate, gen_instances, train, EvalArgs, GenArgs, TrainArgs, TrainMode,
};

#[derive(Parser)]
#[command(name = "streamline", version, about = "Streamliner/model portfolios for BACP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a pool of satisfiable instances inside a difficulty window.
    GenInstances(GenCmd),
    /// Search for a portfolio of streamliner/model combinations.
    Train(TrainCmd),
    /// Run the test protocol and report %imp, %red and speedup.
    Evaluate(EvalCmd),
}

#[derive(Args)]
struct GenCmd {
    /// Difficulty window in kernel nodes, as lo..hi
    #[arg(long)]
    window: String,
    /// Number of instances to accept
    #[arg(long)]
    count: usize,
    /// Independent generation runs pooled together
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = library default)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct TrainCmd {
    /// Instance pool directory from gen-instances
    #[arg(long)]
    instances: PathBuf,
    /// Simulations per search round
    #[arg(long)]
    budget: usize,
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    /// Deepest race level (level l races 2^(l-1) models)
    #[arg(long, default_value_t = 4)]
    max_level: u32,
    /// "mm" races the full model portfolio, "default" only the rank-1 model
    #[arg(long)]
    mode: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Training instances nearest each cluster centroid (0 = whole pool)
    #[arg(long, default_value_t = 0)]
    per_cluster: usize,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct EvalCmd {
    /// Portfolio file(s); repeat to compare several in one report
    #[arg(long = "portfolio", required = true)]
    portfolios: Vec<PathBuf>,
    /// Selector file(s), aligned with --portfolio
    #[arg(long = "selector")]
    selectors: Vec<PathBuf>,
    /// Test pool directory from gen-instances
    #[arg(long)]
    test: PathBuf,
    /// Node budget per streamlined attempt
    #[arg(long)]
    budget: u64,
    #[arg(long)]
    out: PathBuf,
    /// Report only the Virtual Best Solver rows
    #[arg(long, default_value_t = false)]
    vbs_only: bool,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn parse_window(s: &str) -> Result<(u64, u64), Error> {
    let parts: Vec<&str> = s.split("..").collect();
    if parts.len() != 2 {
        return Err(Error::Validation(format!("window '{s}' is not of the form lo..hi")));
    }
    let lo = parts[0]
        .parse::<u64>()
        .map_err(|e| Error::Validation(format!("window lower bound: {e}")))?;
    let hi = parts[1]
        .parse::<u64>()
        .map_err(|e| Error::Validation(format!("window upper bound: {e}")))?;
    if lo >= hi {
        return Err(Error::Validation(format!("window {lo}..{hi} is empty")));
    }
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::GenInstances(cmd) => {
            let window = parse_window(&cmd.window)?;
            let out = gen_instances(&GenArgs {
                window,
                count: cmd.count,
                runs: cmd.runs,
                seed: cmd.seed,
                out: cmd.out,
                jobs: cmd.jobs,
            })?;
            println!(
                "accepted {} instances in {} clusters",
                out.pool.instance_ids.len(),
                out.pool.cluster_count
            );
            for w in &out.pool.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::Train(cmd) => {
            let mode = TrainMode::parse(&cmd.mode)?;
            let out = train(&TrainArgs {
                instances: cmd.instances,
                budget: cmd.budget,
                rounds: cmd.rounds,
                max_level: cmd.max_level,
                mode,
                seed: cmd.seed,
                out: cmd.out,
                per_cluster: cmd.per_cluster,
                jobs: cmd.jobs,
            })?;
            println!(
                "portfolio: {} entries ({} kernel solves)",
                out.portfolio_file.portfolio.entries.len(),
                out.kernel_solves
            );
            Ok(())
        }
        Command::Evaluate(cmd) => {
            let out = evaluate(&EvalArgs {
                portfolios: cmd.portfolios,
                selectors: cmd.selectors,
                test_dir: cmd.test,
                budget: cmd.budget,
                out: cmd.out,
                vbs_only: cmd.vbs_only,
                jobs: cmd.jobs,
            })?;
            for s in &out.summaries {
                println!(
                    "{}/{}: %imp={:.1} %red={:.1} speedup={:.3}",
                    s.mode, s.selector, s.pct_imp, s.pct_red, s.speedup
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successful exits
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Validation(_) | Error::Guard(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ (Error::Io(_) | Error::Serde(_) | Error::Csv(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
