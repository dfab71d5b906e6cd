//! `popsim`: simulate, sweep and analyze population protocols.
//!
//! Exit codes: 0 certificate reached (or analysis completed), 1 invariant
//! violation or wrong answer, 2 budget exhausted, 64 usage error.

mod analyze;
mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use run::Failure;

const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => run::simulate(a),
        Command::Sweep(a) => run::sweep(a),
        Command::Analyze(a) => analyze::analyze(a),
        Command::ClockGap(a) => run::clock_gap(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
