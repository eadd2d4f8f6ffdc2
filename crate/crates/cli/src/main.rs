//! `cartan`: decompose, verify and benchmark recursive Cartan factorizations.
//!
//! Exit codes: 0 success, 1 verification failed, 2 unreadable input or
//! mismatched dimensions, 3 input not special unitary (and no `--repair`),
//! 4 decomposition failed.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match &cli.command {
        Command::Decompose(a) => a.tuning.threads,
        Command::Verify(a) => a.tuning.threads,
        Command::Bench(a) => a.tuning.threads,
        Command::CompareBch(a) => a.tuning.threads,
        Command::Basis(_) => 0,
    };
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(commands::EXIT_INPUT);
        }
    }
    let result = match cli.command {
        Command::Decompose(a) => commands::decompose(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Basis(a) => commands::basis(&a),
        Command::CompareBch(a) => commands::compare_bch(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
