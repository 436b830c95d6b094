mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Ctx, CliError};

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DISCLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("DISCLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    configure_threads()?;
    let ctx = Ctx {
        budget: cli.budget,
        out: cli.out.as_deref(),
        format: cli.format,
    };
    match &cli.command {
        Command::Gen(a) => commands::gen(a, cli, &ctx),
        Command::Verify(a) => commands::verify(a, cli, &ctx),
        Command::Coeffs(a) => commands::coeffs(a, cli, &ctx),
        Command::Norms(a) => commands::norms(a, cli, &ctx),
        Command::Study(a) => commands::study(a, cli, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("disclab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
