//! Command-line interface for the paired Newton-Maxwell / truncated
//! Pauli-Fierz simulation toolkit.
//!
//! Exit codes: 0 run completed and verdict passed, 1 verdict failed,
//! 2 configuration error, 3 numerical failure.

use abraham_qed::harness::{self, RunConfig};
use abraham_qed::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "abraham-qed",
    version,
    about = "Side-by-side simulation of the classical Abraham system and a truncated Pauli-Fierz model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the run configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV and JSON artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized diagnostics; recorded in every summary
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the cutoff admissibility integrals
    #[command(name = "check_cutoff")]
    CheckCutoff(CommonArgs),
    /// Integrate the classical Newton-Maxwell system
    #[command(name = "simulate_classical")]
    SimulateClassical(CommonArgs),
    /// Paired quantum/classical evolution over the hbar sweep
    #[command(name = "simulate_quantum")]
    SimulateQuantum(CommonArgs),
    /// hbar-scaling study of the deficiency measures
    #[command(name = "rate_study")]
    RateStudy(CommonArgs),
    /// Invariant checks across both layers
    #[command(name = "diagnostics")]
    Diagnostics(CommonArgs),
}

fn run(command: &Command) -> abraham_qed::Result<i32> {
    let args = match command {
        Command::CheckCutoff(a)
        | Command::SimulateClassical(a)
        | Command::SimulateQuantum(a)
        | Command::RateStudy(a)
        | Command::Diagnostics(a) => a,
    };
    let cfg = RunConfig::from_file(&args.config)?;
    match command {
        Command::CheckCutoff(_) => harness::check_cutoff(&cfg, &args.out, args.seed),
        Command::SimulateClassical(_) => harness::simulate_classical(&cfg, &args.out, args.seed),
        Command::SimulateQuantum(_) => harness::simulate_quantum(&cfg, &args.out, args.seed),
        Command::RateStudy(_) => harness::rate_study(&cfg, &args.out, args.seed),
        Command::Diagnostics(_) => harness::diagnostics(&cfg, &args.out, args.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
