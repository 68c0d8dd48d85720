#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Input {
        path: String,
        source: gebounds::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Lib(#[from] gebounds::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use gebounds::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Io { .. } => EXIT_OTHER,
            CliError::Input { source, .. } | CliError::Lib(source) => match source {
                E::Parse { .. }
                | E::NoPositiveMass
                | E::NegativeEntry { .. }
                | E::NonFiniteEntry { .. } => EXIT_PARSE,
                E::Domain { .. } | E::Schedule(_) => EXIT_USAGE,
                _ => EXIT_OTHER,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Bounds(a) => commands::bounds(&a),
        Command::Combine(a) => commands::combine(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
