//! `dpmirror`: seeded experiment runner for the private simplex solvers.
//!
//! Exit codes: 0 ok, 1 I/O failure or failed verification, 2 config error,
//! 3 budget error, 4 dataset error, 5 oracle error.

mod config;
mod fail;
mod io;
mod runner;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "dpmirror", version, about = "Private mirror descent experiments over probability simplices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (n, trial) cell of an experiment config and append CSV rows.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to one per core.
        #[arg(long, env = "DPMIRROR_JOBS")]
        jobs: Option<usize>,
    },
    /// Monte Carlo checks of the sparsification bounds.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = "DPMIRROR_JOBS")]
        jobs: Option<usize>,
    },
    /// Write a private synthetic dataset for a synth_data config.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, jobs } => runner::run(&config, &out, jobs).map(|rows| {
            eprintln!("wrote {rows} rows to {}", out.display());
            0
        }),
        Command::Verify { suite, reps, out, seed, jobs } => verify::verify(&suite, reps, seed, &out, jobs).map(|(p, t)| {
            eprintln!("{p}/{t} suites passed");
            if p == t {
                0
            } else {
                1
            }
        }),
        Command::Synth { config, out } => runner::synth(&config, &out).map(|err| {
            eprintln!("max query error {err:.4}");
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
