//! `phoscil` command-line front end.
//!
//! Exit codes: 0 success, 1 numeric failure, 2 I/O failure, 3 invalid
//! arguments or parameters.

mod args;
mod commands;
mod config;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::{worker_count, CliError, RunConfig, EXIT_ARGS};

fn command_description(cmd: &Command) -> String {
    let detail = match cmd {
        Command::Simulate(a) => format!("{a:?}"),
        Command::Scan(a) => format!("{a:?}"),
        Command::FoldCheck(a) => format!("{a:?}"),
        Command::Cycle(a) => format!("{a:?}"),
        Command::Timescales(a) => format!("{a:?}"),
        Command::FoldScaling(a) => format!("{a:?}"),
        Command::FixedPoint => return cmd.name().to_string(),
    };
    format!("{} {detail}", cmd.name())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let threads = worker_count(
        cli.global.threads,
        std::env::var("PHOSCIL_THREADS").ok().as_deref(),
    )?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))?;
    }
    let cfg = RunConfig::resolve(&cli.global, command_description(&cli.command))?;
    let outcome = match &cli.command {
        Command::Simulate(a) => commands::simulate(&cfg, a)?,
        Command::Scan(a) => commands::scan(&cfg, a)?,
        Command::FoldCheck(a) => commands::fold_check(&cfg, a)?,
        Command::Cycle(a) => commands::cycle(&cfg, a)?,
        Command::Timescales(a) => commands::timescales(&cfg, a)?,
        Command::FoldScaling(a) => commands::fold_scaling(&cfg, a)?,
        Command::FixedPoint => commands::fixed_point_cmd(&cfg, cli.global.rounded_table2)?,
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    output::emit(&outcome.artifacts, cfg.out_dir.as_deref(), &mut lock)?;
    lock.flush()?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_ARGS,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phoscil: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
