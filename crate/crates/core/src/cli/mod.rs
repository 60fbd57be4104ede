//! Command-line front end: configuration files in, JSON or CSV reports out.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{
    emit_config, load_config, parse_config, parse_config_for, validate, Analysis, BiasShapeName, CouplingShapeName,
    RunConfig, SourceFormat, TimeValue,
};
pub use run::{
    basis_for, exchange_for, execute, input_for, propagator_for, random_input, schedule_for, write_atomic, Bound,
    Gate, ReportDocument, SweepPoint, GAP_SAMPLES,
};

use crate::error::Error;

/// Exit status when every gate passes.
pub const EXIT_PASS: u8 = 0;
/// Exit status when the run completed but a gate failed.
pub const EXIT_GATE_FAILED: u8 = 1;
/// Exit status for a rejected configuration or command line.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for any other failure.
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "exact-transfer", version, about = "Exact state transmission through interacting chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenphases of G = P U and their residuals.
    Spectrum(RunArgs),
    /// The basis of exactly transmitted states with localization diagnostics.
    Transmit(RunArgs),
    /// Transfer fidelity of a local input from A to B.
    Pst(RunArgs),
    /// Whether an input's eigenphases coincide, which makes its transfer exact.
    Revival(RunArgs),
    /// The collectively dressed one-particle benchmark against its closed form.
    Mixed(RunArgs),
    /// One adiabatic sweep: fidelity, phase, minimum gap and return residual.
    Adiabatic(RunArgs),
    /// Fidelity over a grid of total times.
    Sweep(RunArgs),
    /// Parse a configuration and print it with every default filled in.
    Check {
        #[command(flatten)]
        args: RunArgs,
        /// Analysis to assume when the configuration does not name one.
        #[arg(long)]
        analysis: Option<Analysis>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML or JSON run description.
    #[arg(long)]
    pub config: PathBuf,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (Option<Analysis>, &RunArgs) {
        match self {
            Command::Spectrum(a) => (Some(Analysis::Spectrum), a),
            Command::Transmit(a) => (Some(Analysis::Transmit), a),
            Command::Pst(a) => (Some(Analysis::Pst), a),
            Command::Revival(a) => (Some(Analysis::Revival), a),
            Command::Mixed(a) => (Some(Analysis::Mixed), a),
            Command::Adiabatic(a) => (Some(Analysis::Adiabatic), a),
            Command::Sweep(a) => (Some(Analysis::Sweep), a),
            Command::Check { args, analysis } => (*analysis, args),
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn status(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Runs one parsed command and returns the process exit status.
pub fn run(cli: Cli) -> u8 {
    let checking = matches!(cli.command, Command::Check { .. });
    let (analysis, args) = cli.command.parts();
    let mut config = match load_config(&args.config, analysis) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return status(&e);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if args.format == OutputFormat::Csv && config.analysis != Analysis::Sweep {
        eprintln!("error: csv output is only available for sweeps");
        return EXIT_CONFIG;
    }
    if checking {
        return match emit_config(&config).and_then(|t| emit(&t, config.out.as_ref())) {
            Ok(()) => EXIT_PASS,
            Err(e) => {
                eprintln!("error: {e}");
                status(&e)
            }
        };
    }
    let doc = match execute(&config, args.workers) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return status(&e);
        }
    };
    let text = match args.format {
        OutputFormat::Json => doc.to_json().map(|mut s| {
            s.push('\n');
            s
        }),
        OutputFormat::Csv => Ok(doc.to_csv()),
    };
    if let Err(e) = text.and_then(|t| emit(&t, config.out.as_ref())) {
        eprintln!("error: {e}");
        return status(&e);
    }
    for g in doc.gates.iter().filter(|g| !g.passed) {
        eprintln!("gate failed: {} = {:.3e} (bound {:.3e})", g.name, g.value, g.bound);
    }
    if doc.passed {
        EXIT_PASS
    } else {
        EXIT_GATE_FAILED
    }
}

/// Entry point of the `exact-transfer` binary.
pub fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}
