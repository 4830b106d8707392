mod commands;
mod config;
mod error;
mod output;
mod reproduce;
mod validate;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Report;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Steady-state force sensing with the dissipative quantum Rabi model.
#[derive(Debug, Parser)]
#[command(name = "rabi-sense", version)]
struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one setting, e.g. `--set "params.F=6 yN"`. Repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    /// Worker threads for sweeps (defaults to the number of CPUs).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form and numerical steady-state moments.
    Steady,
    /// Time evolution from the initial state.
    Evolve,
    /// Steady-state moments along the [sweep] axis.
    Sweep,
    /// Minimal detectable forces and the quantum Cramer-Rao bound.
    Sensitivity,
    /// Quantum Fisher information three ways.
    Qfi,
    /// Final spin polarization of the field sweep.
    Squeeze {
        /// Also locate the minimal force numerically (one root search per point).
        #[arg(long)]
        min_force: bool,
    },
    /// Run a canned configuration.
    Reproduce {
        #[arg(value_parser = reproduce::TARGETS)]
        target: String,
    },
    /// Run the oracle-equivalence checks.
    Validate,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this command needs --config PATH".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::from_text(&text, &cli.overrides)
}

fn finish(cli: &Cli, mut cfg: ExperimentConfig, report: Report) -> Result<()> {
    if let Some(dir) = &cli.out {
        cfg.output = dir.clone();
    }
    let w = output::write_run(&cfg.output, &report.stem, &report.table, &cfg, report.plot.as_ref())?;
    println!("wrote {}", w.csv.display());
    println!("wrote {}", w.manifest.display());
    if let Some(p) = w.plot {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    match &cli.command {
        Command::Validate => validate::run(),
        Command::Reproduce { target } => {
            if cli.config.is_some() {
                return Err(CliError::Usage("reproduce uses a built-in configuration; drop --config".into()));
            }
            let cfg = reproduce::resolve(target, &cli.overrides)?;
            let report = reproduce::run(target, &cfg, jobs)?;
            finish(cli, cfg, report)
        }
        cmd => {
            let cfg = load(cli)?;
            let report = match cmd {
                Command::Steady => commands::steady(&cfg)?,
                Command::Evolve => commands::evolve(&cfg)?,
                Command::Sweep => commands::sweep(&cfg, jobs)?,
                Command::Sensitivity => commands::sensitivity(&cfg)?,
                Command::Qfi => commands::qfi(&cfg, jobs)?,
                Command::Squeeze { min_force } => commands::squeeze(&cfg, jobs, *min_force)?,
                Command::Validate | Command::Reproduce { .. } => unreachable!(),
            };
            finish(cli, cfg, report)
        }
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
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
