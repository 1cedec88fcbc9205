//! `rectcomm` command-line front end.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::{CliError, Output};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match commands::run(&cli) {
        Ok(out) => finish(&cli, out, 0),
        Err(CliError::Failed(out)) => finish(&cli, *out, 2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn finish(cli: &Cli, out: Output, code: u8) -> ExitCode {
    match out.emit(&cli.global) {
        Ok(()) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// `RECTCOMM_WORKERS` caps the worker threads used by sweeps.
fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RECTCOMM_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RECTCOMM_WORKERS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
