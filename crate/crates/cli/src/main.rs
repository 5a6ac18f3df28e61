//! `blocknorm` command-line front end.

mod output;
mod panel;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::Manifest;

/// Self-normalized block statistics: tail tables, simulations and
/// simultaneous inference for dependent series.
#[derive(Debug, Parser)]
#[command(name = "blocknorm", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write normal and Student-t (19 and 9 df) upper tails on x = 1.6..4.0 as CSV.
    Table1 {
        /// Output path; "-" writes to standard output.
        #[arg(long, short, default_value = "table1.csv")]
        output: String,
    },
    /// Estimate tail-probability ratios of a block statistic by Monte Carlo.
    Simulate(Box<simulate::SimulateArgs>),
    /// Bonferroni simultaneous confidence intervals for the mean of a panel.
    Ci(panel::CiArgs),
    /// Test a hypothesized mean vector against the simultaneous intervals.
    Test(panel::TestArgs),
}

/// Failures, each tied to an exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flag combinations or values (exit 1).
    Usage(String),
    Lib(blocknorm::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use blocknorm::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(E::Config(_) | E::Domain(_)) => 1,
            CliError::Lib(E::Parse { .. } | E::Shape(_) | E::Io(_) | E::DegenerateDenominator(_)) => 2,
            CliError::Lib(E::TooManyDegenerate { .. }) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lib(e) => e.fmt(f),
        }
    }
}

impl From<blocknorm::Error> for CliError {
    fn from(e: blocknorm::Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn table1(output: &str) -> CliResult<()> {
    let manifest = Manifest::start(serde_json::json!({ "output": output }), None);
    let mut buf = Vec::new();
    blocknorm::mc::write_table1_csv(&mut buf)?;
    output::write_with_manifest(output, &buf, &manifest.finish())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Table1 { output } => table1(&output),
        Command::Simulate(args) => simulate::run(*args),
        Command::Ci(args) => panel::run_ci(args),
        Command::Test(args) => panel::run_test(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("blocknorm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
