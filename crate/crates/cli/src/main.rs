use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use nsbound_cli::config::{OutputOpts, RunConfig, SelectOpts, SolverOpts};
use nsbound_cli::{commands, report};

#[derive(Parser)]
#[command(
    name = "nsbound",
    version,
    about = "Upper bounds on nonlocality-argument success probabilities over the \
             no-signaling polytope under physical principles",
    after_help = "Exit codes: 0 success, 1 error, 2 usage, 3 strict-mode delta exceedance."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a published table: 1 = no-LR summary, 2 = Hardy
    /// per-case, 3 = Cabello per-case, 4 = distances to the quantum
    /// column. Selection flags do not apply; solver flags do.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        number: u8,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Solve selected (argument, principle, case) cells
    Run {
        #[command(flatten)]
        select: SelectOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the sampling oracle alongside the solver and report both
    Oracle {
        #[command(flatten)]
        select: SelectOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Check a 16-entry box file: validity, marginals, and every
    /// applicable principle residual set
    Verify {
        /// JSON array or whitespace-separated numbers, row-major
        path: PathBuf,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns Ok(false) when strict mode is on and a delta exceeded its
/// threshold.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let (report, cfg) = match &cli.command {
        Command::Table { number, solver, output } => {
            let cfg = RunConfig::resolve(None, solver, output)?;
            (commands::cmd_table(*number, &cfg), cfg)
        }
        Command::Run { select, solver, output } => {
            let cfg = RunConfig::resolve(Some(select), solver, output)?;
            (commands::cmd_run(&cfg), cfg)
        }
        Command::Oracle { select, solver, output } => {
            let cfg = RunConfig::resolve(Some(select), solver, output)?;
            (commands::cmd_oracle(&cfg), cfg)
        }
        Command::Verify { path, output } => {
            let cfg = RunConfig::resolve(None, &SolverOpts::default(), output)?;
            (commands::cmd_verify(path)?, cfg)
        }
    };
    let text = report::render(&report, cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, &text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    if cfg.strict {
        let violations = report::strict_violations(&report);
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("strict: {v}");
            }
            return Ok(false);
        }
    }
    Ok(true)
}
