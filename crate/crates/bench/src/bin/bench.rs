use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use cobyqa_bench::{find, registry, run_suite, solver_config, write_csv, SuiteOptions, SOLVER_IDS};

#[derive(Parser)]
#[command(name = "bench", about = "Run cobyqa on the built-in problems and write profile data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the selected problems and write runs.csv, perf_<tau>.csv and data_<tau>.csv.
    Run {
        #[arg(long, value_delimiter = ',', default_value = "cobyqa")]
        solvers: Vec<String>,
        /// Problem ids, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        problems: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-3,1e-5,1e-7")]
        tau: Vec<f64>,
        /// Relative noise level of the objective.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Number of noisy repetitions per problem.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 500)]
        maxfev_mult: usize,
        #[arg(long, default_value_t = 1.0)]
        rhobeg: f64,
        #[arg(long, default_value_t = 1e-6)]
        rhoend: f64,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
    },
    /// List problem and solver ids.
    List,
}

fn listing() -> String {
    let problems: Vec<String> = registry().iter().map(|p| format!("{} (n = {})", p.id, p.n)).collect();
    format!("solvers: {}\nproblems: {}, rosenbrock:<n>", SOLVER_IDS.join(", "), problems.join(", "))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::List => println!("{}", listing()),
        Command::Run { solvers, problems, tau, sigma, seeds, maxfev_mult, rhobeg, rhoend, out } => {
            let solvers = solvers
                .iter()
                .map(|s| solver_config(s).ok_or_else(|| anyhow!("unknown solver `{s}`\n{}", listing())))
                .collect::<Result<Vec<_>>>()?;
            let problems = if problems.iter().any(|p| p == "all") {
                registry()
            } else {
                problems
                    .iter()
                    .map(|p| find(p).ok_or_else(|| anyhow!("unknown problem `{p}`\n{}", listing())))
                    .collect::<Result<Vec<_>>>()?
            };
            if !(sigma >= 0.0) {
                return Err(anyhow!("sigma must be nonnegative"));
            }
            let opts = SuiteOptions { taus: tau, sigma, seeds, maxfev_mult, rhobeg, rhoend };
            let start = Instant::now();
            let result = run_suite(&solvers, &problems, &opts)?;
            write_csv(&result, &out)?;
            eprintln!("{} runs in {:.1}s, written to {}", result.records.len(), start.elapsed().as_secs_f64(), out.display());
        }
    }
    Ok(())
}
