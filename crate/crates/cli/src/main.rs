mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use yule_core::YuleError;

use crate::args::Cli;

/// Invalid flags or arguments.
const EXIT_USAGE: u8 = 1;
/// Numeric failure: divergence, non-convergence, consistency.
const EXIT_NUMERIC: u8 = 2;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli, args: &[String]) -> anyhow::Result<()> {
    let started = manifest::now();
    let output = commands::execute(cli)?;
    let stdout = manifest::render(&output.json)?;
    println!("{stdout}");
    if let Some(path) = manifest::manifest_path(cli) {
        manifest::write_manifest(&path, cli, args, started, &output, &stdout)?;
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<YuleError>() {
        Some(YuleError::Domain(_)) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}
