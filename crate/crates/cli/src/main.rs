//! `pdcbell`: batch front-end for the PDC network toolkit.

mod bell;
mod config;
mod dump;
mod lp;
mod output;
mod paradox;
mod reproduce;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{read_config_file, CommandKind, ConfigFile, Flags, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "pdcbell", version, about = "Simulate frustrated PDC rings, evaluate Bell inequalities and certify LHV models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare the symbolic engine with the reference amplitudes and probability table.
    Reproduce(Flags),
    /// Sweep the phase sum and evaluate the Bell expressions.
    Bell(Flags),
    /// Decide LHV feasibility over a phase grid.
    Lp(Flags),
    /// Implications, paradox gap and degradation budget.
    Paradox(Flags),
    /// Print the symbolic state as JSON.
    DumpState(Flags),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration (exit 2).
    Usage(String),
    /// A reproduction check failed (exit 1).
    Assertion(String),
    /// Numeric, convergence or I/O failure (exit 3).
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Assertion(m) => write!(f, "check failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<pdc_core::Error> for CliError {
    fn from(e: pdc_core::Error) -> Self {
        match e {
            pdc_core::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn run(kind: CommandKind, flags: Flags) -> Result<(), CliError> {
    if let Some(n) = flags.workers {
        if n == 0 {
            return Err(CliError::Usage("worker count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))?;
    }
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => ConfigFile::default(),
    };
    let config = RunConfig::resolve(kind, file, &flags)?;
    let sink = output::Sink::new(config.out.clone())?;
    sink.write("run_config.json", &config.canonical_json())?;
    match kind {
        CommandKind::Reproduce => reproduce::run(&config, &sink),
        CommandKind::Bell => bell::run(&config, &sink),
        CommandKind::Lp => lp::run(&config, &sink),
        CommandKind::Paradox => paradox::run(&config, &sink),
        CommandKind::DumpState => dump::run(&config, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::Reproduce(f) => (CommandKind::Reproduce, f),
        Command::Bell(f) => (CommandKind::Bell, f),
        Command::Lp(f) => (CommandKind::Lp, f),
        Command::Paradox(f) => (CommandKind::Paradox, f),
        Command::DumpState(f) => (CommandKind::DumpState, f),
    };
    match run(kind, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
