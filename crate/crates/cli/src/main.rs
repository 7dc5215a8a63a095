//! `quasirand` command-line front end.
//!
//! Exit codes: 0 success, 1 verdict-level failure (an `--expect` mismatch or a
//! failing lemma suite), 2 input error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(quasirand::Error),
}

impl From<quasirand::Error> for CliError {
    fn from(e: quasirand::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub enum Outcome {
    Success,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let clock = output::Clock::start();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli, &clock) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
