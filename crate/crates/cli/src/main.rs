mod bench;
mod gen;
mod instance;
mod output;
mod solve;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] hyperdisc::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    #[default]
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "hyperdisc", version, about = "Hyperbolic discrepancy: instances, interlacing-family search, invariant checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct Global {
    /// Seed for every random choice of the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Backend::Rational)]
    pub backend: Backend,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded instance file.
    Gen(gen::GenArgs),
    /// Search an instance for a low-discrepancy assignment.
    Solve(solve::SolveArgs),
    /// Run invariant suites on an instance file or on the built-in fixtures.
    Verify(verify::VerifyArgs),
    /// Compare brute force, blocked search and random assignments over seeded instances.
    Bench(bench::BenchArgs),
}

/// What a command produced and the exit code it asks for.
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

impl Outcome {
    pub fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Gen(a) => gen::run(&a, g),
        Command::Solve(a) => solve::run(&a, g),
        Command::Verify(a) => verify::run(&a, g),
        Command::Bench(a) => bench::run(&a, g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.global.out.clone();
    match run(cli) {
        Ok(outcome) => {
            let written = match &out {
                Some(path) => std::fs::write(path, &outcome.text),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
