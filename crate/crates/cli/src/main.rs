//! `dronecine`: scan planning, shot generation, headless simulation and
//! plan export from the command line, plus the service and a client for it.
//!
//! Exit status: 0 on success, 1 for invalid input or usage, 2 when a file or
//! network operation fails.

mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let result = match &cli.command {
        Command::PlanScan(a) => commands::plan_scan_cmd(a),
        Command::Shot(a) => commands::shot_cmd(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::VerifyOverlap(a) => commands::verify_overlap_cmd(a),
        Command::Export(a) => commands::export_cmd(a),
        Command::Serve(a) => commands::serve_cmd(a),
        Command::Remote(a) => commands::remote_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
