use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dbc::harness::{run_scenario, ScenarioScript};
use dbc::Backend;
use dbc_cli::{parse_backend, read};

/// Runs multi-party scenario scripts over file-based message exchange.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a script; exits 0 iff every step and check passes.
    Run {
        script: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mock", value_parser = parse_backend)]
        backend: Backend,
        /// Must be empty or absent. Defaults to a fresh temporary directory.
        #[arg(long)]
        workdir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let Command::Run {
        script,
        seed,
        backend,
        workdir,
    } = cli.command;
    let parsed: ScenarioScript = read(&script)?
        .parse()
        .with_context(|| format!("parsing {}", script.display()))?;
    let workdir = match workdir {
        Some(w) => w,
        None => tempfile::Builder::new().prefix("dbc-harness-").tempdir()?.keep(),
    };
    eprintln!("transcript in {}", workdir.display());
    let report = run_scenario(&parsed, backend, &workdir, seed)?;
    print!("{}", report.summary());
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
