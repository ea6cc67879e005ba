//! `fraclab`: command-line runner for the verification suite.
//!
//! Exit status is 0 when every row passes, 1 when a row fails or a
//! computation breaks down, and 2 for invalid input.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::{execute, parse_config, Cli, Command, LISTING};
use error::CliError;

fn run(cli: Cli) -> Result<bool, CliError> {
    if cli.list {
        for (name, what) in LISTING {
            println!("{name:<18} {what}");
        }
        return Ok(true);
    }
    let (threads, cmd) = match cli.command {
        Some(Command::Run { config }) => {
            let (t, cmd) = parse_config(&config)?;
            (cli.threads.or(t), cmd)
        }
        Some(cmd) => (cli.threads, cmd),
        None => return Err(CliError::Usage("no subcommand given; see --help".into())),
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Invalid("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    }
    let outcome = execute(&cmd)?;
    if !cmd.out().is_some_and(|o| o.json_to_stdout()) {
        print!("{}", outcome.text());
    }
    Ok(outcome.pass())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
