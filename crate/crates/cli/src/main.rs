//! `psido`: symbol classification, parametrix studies, compactness and Gårding
//! diagnostics, and Galerkin solves from the command line.
//!
//! Exit codes: 0 success, 1 config error, 2 hypothesis failure, 3 numerical failure.

mod commands;
mod config;
mod error;
mod expr;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Options;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "psido", version, about = "Weighted pseudo-differential operators on the circle and the lattice")]
struct Cli {
    /// TOML file with default values for any option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Seminorm-based class membership (exit 2 when inconsistent).
    Classify(Options),
    /// Parametrix residual profiles and decay slopes.
    Parametrix(Options),
    /// Gohberg-based compactness verdict (exit 0 compact, 2 not compact, 3 inconclusive).
    Compactness(Options),
    /// Gårding or sharp Gårding constants.
    Garding(Options),
    /// Solve `(T_σ + λ) u = f`.
    Solve(Options),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Parametrix(_) => "parametrix",
            Command::Compactness(_) => "compactness",
            Command::Garding(_) => "garding",
            Command::Solve(_) => "solve",
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let name = cli.command.name();
    let (flags, run): (Options, fn(&Options) -> Result<commands::Outcome, CliError>) = match cli.command {
        Command::Classify(o) => (o, commands::classify),
        Command::Parametrix(o) => (o, commands::parametrix_cmd),
        Command::Compactness(o) => (o, commands::compactness),
        Command::Garding(o) => (o, commands::garding),
        Command::Solve(o) => (o, commands::solve_cmd),
    };
    let opts = match &cli.config {
        Some(path) => config::load(path, name)?.overlay(flags),
        None => flags,
    };
    let out = run(&opts)?;
    let text = serde_json::to_string_pretty(&out.report).expect("serializable");
    match &opts.json {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(out.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("psido: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
