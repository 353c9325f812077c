//! `lse`: replica predictions, Monte Carlo checks and rate curves for LSE precoding.
//!
//! Every command sweeps `--alpha` (a value or `START:STOP:STEPS`) and writes one row per point,
//! as CSV (default) or JSON, to `--output` or stdout. A point whose solver fails is written
//! with `converged=false` and the reason in `error`; the sweep carries on.

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Command;
use config::{ConfigError, Options, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lse", version, about = "LSE precoding: replica predictions and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Replica-symmetric prediction.
    Rs(Options),
    /// One-step RSB prediction (bounded sets only).
    Rsb(Options),
    /// RS prediction next to the simulated distortion of the solver.
    Simulate(Options),
    /// Rate lower bound at the rate-optimal gamma.
    Rate(Options),
    /// RS (or 1-RSB with --rsb), simulation and rate in one table.
    Sweep(Options),
    /// Compares the OFDM equivalent Gram spectrum with a single subcarrier's.
    #[command(name = "ofdm-check")]
    OfdmCheck(Options),
}

enum Failure {
    Config(ConfigError),
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Run(e.to_string())
    }
}

fn resolve(flags: &Options) -> Result<RunConfig, ConfigError> {
    let merged = match &flags.config {
        Some(path) => Options::load(path)?.overlay(flags),
        None => flags.clone(),
    };
    RunConfig::resolve(&merged)
}

fn write(cfg: &RunConfig, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match &cfg.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (cmd, flags) = match &cli.command {
        Sub::Rs(o) => (Some(Command::Rs), o),
        Sub::Rsb(o) => (Some(Command::Rsb), o),
        Sub::Simulate(o) => (Some(Command::Simulate), o),
        Sub::Rate(o) => (Some(Command::Rate), o),
        Sub::Sweep(o) => (Some(Command::Sweep), o),
        Sub::OfdmCheck(o) => (None, o),
    };
    let cfg = resolve(flags)?;
    match cmd {
        Some(cmd) => {
            commands::check(&cfg, cmd)?;
            let rows = commands::sweep(&cfg, cmd);
            write(&cfg, |w| output::emit(w, cfg.format, &commands::meta(&cfg, cmd.name()), &rows))
        }
        None => {
            let row = commands::ofdm_check(&cfg).map_err(|e| Failure::Run(e.to_string()))?;
            write(&cfg, |w| output::emit(w, cfg.format, &commands::meta(&cfg, "ofdm-check"), std::slice::from_ref(&row)))?;
            if row.pass {
                Ok(())
            } else {
                Err(Failure::Run(format!("KS distance {} exceeds {}", row.ks, cfg.ks_max)))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("lse: invalid configuration: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("lse: {e}");
            ExitCode::FAILURE
        }
    }
}
