use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use locdyn_cli::{exit_code, run, Invocation, Subcommand};

#[derive(Parser)]
#[command(
    name = "locdyn",
    version,
    about = "Localization kinetics solvers, simulators and oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Localized fraction g(τ) for one or more seeds.
    Gamma(Common),
    /// Steady-state distribution p(u).
    Steady(Common),
    /// Transient p(u; τ) from an initial profile.
    Transient(Common),
    /// Monte Carlo population in the fully localized regime.
    McSteady(Common),
    /// Monte Carlo population growing from a localized seed fraction.
    McTransient(Common),
    /// Gaussian box-measurement contraction study.
    Oracle(Common),
    /// The g(τ) family and the steady-state inset.
    Fig1(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Single seed for Monte Carlo runs (replaces `seeds`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; runs go to <out>/<subcommand>/<name>/.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for seed sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (sub, c) = match cli.command {
        Command::Gamma(c) => (Subcommand::Gamma, c),
        Command::Steady(c) => (Subcommand::Steady, c),
        Command::Transient(c) => (Subcommand::Transient, c),
        Command::McSteady(c) => (Subcommand::McSteady, c),
        Command::McTransient(c) => (Subcommand::McTransient, c),
        Command::Oracle(c) => (Subcommand::Oracle, c),
        Command::Fig1(c) => (Subcommand::Fig1, c),
    };
    let inv = Invocation {
        config: c.config,
        sets: c.sets,
        seed: c.seed,
        out: Some(c.out),
        jobs: c.jobs,
    };
    match run(sub, &inv) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("locdyn {}: {e}", sub.name());
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
