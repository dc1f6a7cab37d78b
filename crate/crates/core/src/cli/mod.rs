//! Command-line front end: argument parsing, dispatch and JSON reports.
//!
//! Exit codes: 0 when every asserted check passes, 1 when a check fails or a
//! computation cannot be completed, 2 for unreadable or invalid input.

mod commands;
pub mod file;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::report::{Check, Observation};
use crate::tuples::GeneratorKind;

pub use commands::selftest_report;
pub use file::{parse_tuple_bytes, parse_tuple_file, LoadedTuple, TupleFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("validation error: {0}")]
    Validation(#[from] crate::Error),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "omt", version, about = "Model theory for tuples of commuting contraction matrices")]
pub struct Cli {
    /// Write the report to this path instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Do not print one line per check on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Seed for randomized steps; a seed in the tuple file is used otherwise.
    #[arg(long, global = true, env = "OMT_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LiftKind {
    Schaffer,
    Douglas,
    Bcl,
    Noncom,
    Pcc,
    Model,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a tuple file.
    Validate { file: String },
    /// Split into unitary and completely non-unitary parts.
    Decompose { file: String },
    /// Fundamental operators of the tuple and of its adjoint.
    Fundamental { file: String },
    /// Andô tuple and joint Halmos dilation.
    Ando { file: String },
    /// Isometric and pseudo-commutative lifts.
    Lift {
        file: String,
        #[arg(long, value_enum)]
        kind: LiftKind,
        /// Truncation degree for the Schäffer lift.
        #[arg(long, default_value_t = 16)]
        degree: usize,
    },
    /// Characteristic function: boundary defect table and Taylor coefficients.
    Theta {
        file: String,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Characteristic triple.
    Triple { file: String },
    /// Decide whether two tuples have coinciding characteristic triples.
    Equiv { first: String, second: String },
    /// Admissibility of the characteristic triple of a tuple.
    CheckAdmissible {
        file: String,
        /// Perturb the fundamental operators by this spectral norm first.
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// Sample the von Neumann inequality with random polynomials.
    VnSample {
        file: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
    },
    /// Write a generated tuple file.
    Gen {
        #[arg(long)]
        kind: GeneratorKind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        d: usize,
    },
    /// Run the invariant suite on seeded instances.
    Selftest {
        #[arg(long, default_value_t = 10)]
        instances: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub truncation_degree: Option<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub input_digests: Vec<String>,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub data: serde_json::Value,
    pub environment: Environment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Results of one command before they are wrapped in a [`Report`].
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub data: serde_json::Value,
    pub degree: Option<usize>,
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Validate { .. } => "validate",
        Command::Decompose { .. } => "decompose",
        Command::Fundamental { .. } => "fundamental",
        Command::Ando { .. } => "ando",
        Command::Lift { .. } => "lift",
        Command::Theta { .. } => "theta",
        Command::Triple { .. } => "triple",
        Command::Equiv { .. } => "equiv",
        Command::CheckAdmissible { .. } => "check-admissible",
        Command::VnSample { .. } => "vn-sample",
        Command::Gen { .. } => "gen",
        Command::Selftest { .. } => "selftest",
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn print_checks(checks: &[Check]) {
    let mut err = std::io::stderr().lock();
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "{status}  {}  residual={:.3e}  tolerance={:.3e}", c.name, c.residual, c.tolerance);
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let name = command_name(&cli.command);
    let prepared = match commands::prepare(&cli.command) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("omt {name}: {e}");
            return 2;
        }
    };
    let seed = cli.seed.or(prepared.file_seed).unwrap_or(0);
    if let Command::Gen { kind, dim, d } = &cli.command {
        return match commands::generate_file(*kind, *dim, *d, seed) {
            Ok(text) => match emit(&text, &cli.out) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("omt gen: {e}");
                    2
                }
            },
            Err(e) => {
                eprintln!("omt gen: {e}");
                2
            }
        };
    }
    let (outcome, error) = match commands::execute(&cli.command, &prepared, seed) {
        Ok(outcome) => (outcome, None),
        Err(e) => (Outcome::default(), Some(e.to_string())),
    };
    let pass = error.is_none() && outcome.checks.iter().all(|c| c.pass);
    let report = Report {
        command: name.to_string(),
        input_digests: prepared.inputs.iter().map(|l| l.digest.clone()).collect(),
        pass,
        checks: outcome.checks,
        observations: outcome.observations,
        data: outcome.data,
        environment: Environment { version: env!("CARGO_PKG_VERSION"), truncation_degree: outcome.degree, seeds: vec![seed] },
        error,
    };
    if !cli.quiet {
        print_checks(&report.checks);
        if let Some(e) = &report.error {
            eprintln!("ERROR  {e}");
        }
    }
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    if let Err(e) = emit(&text, &cli.out) {
        eprintln!("omt {name}: {e}");
        return 2;
    }
    if pass {
        0
    } else {
        1
    }
}
