//! `threedot`: sample the 3-dot field and its relatives, compute exact window
//! laws, run the verification suites, and emit profile tables.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 a size bound of
//! the exact engine was hit.

mod config;
mod profile;
mod sample;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliError, CommandName, Flags};

#[derive(Parser)]
#[command(name = "threedot", version, about = "Exact and sampled experiments on 3-dot-type processes")]
struct Cli {
    /// TOML file with the same keys as the flags; flags given here win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw random realizations (PBM for the field, CSV words otherwise).
    Sample(Flags),
    /// Exact law of one window.
    Law(Flags),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(Flags),
    /// Exact independence-defect tables.
    Profile(Flags),
}

pub struct Report {
    pub body: String,
    pub passed: bool,
}

impl Report {
    pub fn ok(body: String) -> Self {
        Self { body, passed: true }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("THREEDOT_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("THREEDOT_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (name, flags) = match cli.command {
        Some(Command::Sample(f)) => (Some(CommandName::Sample), f),
        Some(Command::Law(f)) => (Some(CommandName::Law), f),
        Some(Command::Verify(f)) => (Some(CommandName::Verify), f),
        Some(Command::Profile(f)) => (Some(CommandName::Profile), f),
        None => (None, Flags::default()),
    };
    let flags = match &cli.config {
        Some(path) => flags.or(Flags::load(path)?),
        None => flags,
    };
    let name = name
        .or(flags.command)
        .ok_or_else(|| CliError::Usage("no command given (sample, law, verify, profile)".into()))?;
    let report = match name {
        CommandName::Sample => sample::sample(&flags)?,
        CommandName::Law => sample::law(&flags)?,
        CommandName::Verify => verify::verify(&flags)?,
        CommandName::Profile => profile::profile(&flags)?,
    };
    match &flags.out {
        Some(path) => std::fs::write(path, report.body.as_bytes())?,
        None => std::io::stdout().lock().write_all(report.body.as_bytes())?,
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("threedot: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
