//! `relboltz` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 verification
//! failure.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use config::{ConfigArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "relboltz",
    version,
    about = "Relativistic Boltzmann collision operator in n dimensions"
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = RunConfig::resolve(&cli.config).and_then(|cfg| {
        let report = commands::run(&cli.command, &cfg)?;
        report.output.emit()?;
        Ok(report.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
