//! Batch experiment runner for the `sgalab-core` simulations.
//!
//! [`Cli`] is the command-line surface; [`config`] turns flags and TOML
//! documents into a validated [`ExperimentConfig`]; [`run`] executes it on a
//! rayon pool of the requested size and writes the outputs described in
//! [`output`]. Outputs depend only on the config, never on the thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{Experiment, ExperimentConfig, RunOptions, Settings, OUT_DIR_ENV};
pub use run::{run, RunOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("runtime error: {0}")]
    Runtime(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// A core error raised while validating `field`.
    pub fn from_core_at(field: &str, e: sgalab_core::Error) -> Self {
        match e {
            sgalab_core::Error::Config { field, reason } => CliError::Config { field, reason },
            other => CliError::config(field, other.to_string()),
        }
    }

    /// The same error attributed to another key.
    pub fn rename(self, to: &str) -> Self {
        match self {
            CliError::Config { reason, .. } => CliError::config(to, reason),
            other => other,
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => Some(field),
            _ => None,
        }
    }

    /// 1 for configuration errors, 2 for everything raised while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<sgalab_core::Error> for CliError {
    fn from(e: sgalab_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sgalab", version, about = "Replicated simple-GA experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loss of the Master sequence below the critical value (pi < 1).
    Disordered(Invocation),
    /// Rise of the mean fitness above the critical value (pi > 1).
    Quasispecies(Invocation),
    /// Both event frequencies over a grid of pi.
    Sweep(Invocation),
    /// Descendant counts against a 2 Poisson(4) branching process.
    DominanceTn(Invocation),
    /// One GA step against the exact lower chain.
    DominanceOnestep(Invocation),
    /// Master counts against the nu* branching process.
    DominanceNstar(Invocation),
    /// Galton–Watson extinction and survival.
    Gw(Invocation),
    /// Lower chain transition matrix and hitting times.
    Lowerchain(Invocation),
    /// Adaptive control of p_c and p_m.
    Tune(Invocation),
}

#[derive(Debug, Args)]
pub struct Invocation {
    /// TOML document with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

impl Command {
    pub fn split(&self) -> (Experiment, &Invocation) {
        match self {
            Command::Disordered(i) => (Experiment::Disordered, i),
            Command::Quasispecies(i) => (Experiment::Quasispecies, i),
            Command::Sweep(i) => (Experiment::Sweep, i),
            Command::DominanceTn(i) => (Experiment::DominanceTn, i),
            Command::DominanceOnestep(i) => (Experiment::DominanceOnestep, i),
            Command::DominanceNstar(i) => (Experiment::DominanceNstar, i),
            Command::Gw(i) => (Experiment::Gw, i),
            Command::Lowerchain(i) => (Experiment::Lowerchain, i),
            Command::Tune(i) => (Experiment::Tune, i),
        }
    }
}

impl Invocation {
    /// File settings overlaid with flags.
    pub fn settings(&self) -> Result<Settings, CliError> {
        let base = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        Ok(base.overlay(&self.settings))
    }
}

/// Parses, validates and runs one command.
pub fn execute(cli: &Cli) -> Result<RunOutcome, CliError> {
    let (experiment, invocation) = cli.command.split();
    let settings = invocation.settings()?;
    let config = ExperimentConfig::from_settings(experiment, &settings)?;
    run(&config, &RunOptions::from_settings(&settings))
}
