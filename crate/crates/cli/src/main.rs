//! `kfull`: command-line experiments over k-full numbers.
//!
//! Every subcommand writes one machine-readable payload to stdout (JSON by
//! default, CSV with `--output csv`) and diagnostics to stderr. Exit status is
//! 0 on success, 2 on usage or domain errors, 1 on computation failures.

mod commands;
mod config;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use config::Cli;

/// Error split by exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl From<kfull_core::Error> for CliError {
    fn from(e: kfull_core::Error) -> Self {
        use kfull_core::Error::*;
        match e {
            Domain(_) | OutOfRange { .. } | NotKFull { .. } | Overflow(_) => CliError::Usage(e.to_string()),
            Resource { .. } | Consistency(_) => CliError::Compute(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Compute(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Compute(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Compute(format!("json error: {e}"))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let work = || -> Result<(), CliError> {
        let mut out = io::BufWriter::new(io::stdout());
        commands::dispatch(cli, &mut out)?;
        out.flush()?;
        Ok(())
    };
    match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Compute(format!("cannot start thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            e.exit();
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
