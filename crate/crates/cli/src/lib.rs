//! Subcommands and configuration handling of the `locdyn` binary.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use locdyn::{Error, Result};

use config::{parse_text, RunConfig, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Gamma,
    Steady,
    Transient,
    McSteady,
    McTransient,
    Oracle,
    Fig1,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Gamma => "gamma",
            Subcommand::Steady => "steady",
            Subcommand::Transient => "transient",
            Subcommand::McSteady => "mc-steady",
            Subcommand::McTransient => "mc-transient",
            Subcommand::Oracle => "oracle",
            Subcommand::Fig1 => "fig1",
        }
    }

    pub fn schema(self) -> Schema {
        match self {
            Subcommand::Gamma => config::GAMMA,
            Subcommand::Steady => config::STEADY,
            Subcommand::Transient => config::TRANSIENT,
            Subcommand::McSteady => config::MC_STEADY,
            Subcommand::McTransient => config::MC_TRANSIENT,
            Subcommand::Oracle => config::ORACLE,
            Subcommand::Fig1 => config::FIG1,
        }
    }
}

/// Everything a run needs besides the subcommand.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

pub fn resolve(sub: Subcommand, inv: &Invocation) -> Result<RunConfig> {
    let text = match &inv.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let entries = parse_text(&text)?;
    let mut cfg = RunConfig::resolve(sub.name(), sub.schema(), &entries, &inv.sets)?;
    if let Some(seed) = inv.seed {
        if !cfg.entries().iter().any(|(k, _)| k == "seeds") {
            return Err(Error::Config(format!("`{}` takes no seed", sub.name())));
        }
        cfg.set("seeds", seed.to_string());
    }
    Ok(cfg)
}

/// Resolves the configuration and runs the subcommand; returns the run
/// directory.
pub fn run(sub: Subcommand, inv: &Invocation) -> Result<PathBuf> {
    let cfg = resolve(sub, inv)?;
    let out = inv.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let out: &Path = &out;
    match sub {
        Subcommand::Gamma => commands::cmd_gamma(&cfg, out),
        Subcommand::Steady => commands::cmd_steady(&cfg, out),
        Subcommand::Transient => commands::cmd_transient(&cfg, out),
        Subcommand::McSteady => commands::cmd_mc_steady(&cfg, out, inv.jobs),
        Subcommand::McTransient => commands::cmd_mc_transient(&cfg, out, inv.jobs),
        Subcommand::Oracle => commands::cmd_oracle(&cfg, out),
        Subcommand::Fig1 => commands::cmd_fig1(&cfg, out),
    }
}

/// 1 for invalid input, 2 for a solver that failed to converge or stay
/// within its bounds, 3 for I/O failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => 3,
        Error::NonConvergence { .. }
        | Error::Quadrature(_)
        | Error::Instability { .. }
        | Error::MassDrift { .. }
        | Error::LostMass { .. }
        | Error::Overflow { .. }
        | Error::VanishingNorm(_) => 2,
        _ => 1,
    }
}
