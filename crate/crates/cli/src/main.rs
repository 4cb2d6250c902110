mod args;
mod commands;
mod config;
mod failure;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::{CmdResult, Failure};

fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Explain(a) => commands::explain(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::Curves(a) => commands::curves(a),
        Command::Grid(a) => commands::grid(a),
        Command::DisagreeStudy(a) => commands::disagree_study(a),
        Command::ImportanceStudy(a) => commands::importance_study(a),
        Command::BaselineSweep(a) => commands::sweep(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Failure::Input(anyhow::Error::new(e).context("building thread pool")))
        .and_then(|pool| pool.install(|| dispatch(&cli.command)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
