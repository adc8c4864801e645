//! `thinshell` command line: verification suites, rate studies, solver runs and reports.

mod commands;
mod config;
mod io;
mod plot;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{CliError, Command, RunConfig};
use config::{value_error, KeyValues};

#[derive(Debug, Parser)]
#[command(name = "thinshell", version, about = "Thin-shell geometry and limit-flow verification")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// plain-text `section.key = value` run configuration
    #[arg(long)]
    config: PathBuf,
    /// output directory for reports and artifacts
    #[arg(long)]
    out: PathBuf,
    /// overrides for the built-in tolerance table
    #[arg(long)]
    tolerances: Option<PathBuf>,
    /// seed for random test fields, overriding run.seed
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("THINSHELL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| value_error("THINSHELL_THREADS", format!("expected a positive integer, got '{raw}'")))?;
    // fails only if a pool already exists, in which case it is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let config = KeyValues::load(&cli.config)?;
    let overrides = cli.tolerances.as_deref().map(KeyValues::load).transpose()?;
    let run = RunConfig::new(cli.command, config, cli.out, overrides, cli.seed)?;
    let report = commands::run(&run)?;
    print!("{}", report.summary());
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
