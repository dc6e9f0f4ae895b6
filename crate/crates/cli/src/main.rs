//! `vbi`: batch driver for the vehicle-bridge interaction engine.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vbi", version, about = "Coupled and decoupled vehicle-bridge interaction simulation")]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// TOML configuration; omitted sections and keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "VBI_OUT_DIR", default_value = "vbi-out")]
    out: PathBuf,

    /// Seed for both generators (roughness uses it, traffic uses it + 1).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write full response histories for every compared cell.
    #[arg(long, global = true)]
    emit_traces: bool,

    /// Re-integrate the bridge from t = 0 on every compatibility iteration.
    #[arg(long, global = true)]
    strict_paper_mode: bool,

    /// Worker threads for `compare` (the benchmark always runs serially).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Print the default configuration and exit.
    #[arg(long)]
    print_default_config: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form vs uncoupled amplitude error over the (α, β, γ) grid.
    TheorySweep,
    /// One scenario; writes bridge, vehicle and contact histories.
    Simulate,
    /// Coupled vs decoupled accuracy over the span × traffic × vehicle grid.
    Compare,
    /// Wall-time comparison of both schemes across spans.
    Benchmark,
    /// Built-in verification checks.
    Validate,
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        config.set_seed(s);
    }
    if cli.strict_paper_mode {
        config.simulation.strict_paper_mode = true;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.print_default_config {
        print!("{}", Config::default().to_toml());
        return Ok(());
    }
    let Some(cmd) = &cli.command else {
        return Err(CliError::Config("no subcommand given (see --help)".into()));
    };
    if cli.jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let ctx = Context {
        config: load(&cli)?,
        config_path: cli.config.clone(),
        out: cli.out.clone(),
        emit_traces: cli.emit_traces,
        jobs: cli.jobs,
    };
    match cmd {
        Cmd::TheorySweep => commands::theory_sweep(&ctx),
        Cmd::Simulate => commands::simulate(&ctx),
        Cmd::Compare => commands::compare(&ctx),
        Cmd::Benchmark => commands::benchmark(&ctx),
        Cmd::Validate => commands::validate(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vbi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
