//! `gwrboost` command-line interface.

mod args;
mod fit;
mod output;
mod report;
mod simulate;
mod sweep;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "gwrboost", version, about = "Geographically weighted regression with gradient boosting")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "GWRBOOST_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate simulated replications and compare OLS, GWR and GWRBoost.
    Simulate(simulate::SimulateArgs),
    /// Fit one model to a CSV file.
    Fit(fit::FitArgs),
    /// Search the GWR bandwidth only.
    Search(fit::SearchArgs),
    /// Per-stage boosting curves over a grid of settings, with early stopping off.
    Sweep(sweep::SweepArgs),
    /// Merge diagnostics files into a comparison table.
    Report(report::ReportArgs),
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    let n = match threads {
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match &cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Search(a) => fit::run_search(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Report(a) => report::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<gwrboost::Error>())
                .map_or("cli", |g| g.kind());
            let chain: Vec<String> = e.chain().skip(1).map(|c| c.to_string()).collect();
            let body = json!({ "error": { "kind": kind, "message": e.to_string(), "causes": chain } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
