//! `chns`: run experiments, convergence studies and energy audits.

use std::path::PathBuf;
use std::process::ExitCode;

use chns_core::harness::{converge, load_config, run_config, Experiment, RunConfig, TABLES};
use chns_core::{ChnsError, StepMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "chns", version, about = "Energy-stable Cahn-Hilliard-Navier-Stokes solver on a MAC grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment to its final time, writing snapshots, ledger and track.
    Run(Common),
    /// Cauchy-error convergence study; writes table1.csv, table2.csv, table3.csv.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Coarse cell counts, comma separated; each also runs at twice the resolution.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
    },
    /// Run and check the discrete energy identity step by step.
    EnergyAudit {
        #[command(flatten)]
        common: Common,
        /// Allowed `|residual| / max(1, |E|)` per step.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the time coupling.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Coupled,
    Decoupled,
}

impl From<Mode> for StepMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Coupled => StepMode::Coupled,
            Mode::Decoupled => StepMode::Decoupled,
        }
    }
}

fn load(common: &Common, fallback: Experiment) -> Result<RunConfig, ChnsError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::preset(fallback),
    };
    if let Some(m) = common.mode {
        cfg.params.mode = m.into();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), ChnsError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = load(&common, Experiment::Custom)?;
            cfg.validate()?;
            let sum = run_config(&cfg, common.out.as_deref())?;
            let last = sum.track.last().expect("track holds the initial state");
            println!(
                "{}: {} steps to t={:e}, E={:e}, mass={:e}, snapshots={}",
                cfg.experiment.name(),
                last.step,
                last.t,
                last.energy,
                last.mass,
                sum.snapshots.len()
            );
        }
        Command::Converge { common, levels } => {
            let mut cfg = load(&common, Experiment::Converge)?;
            if let Some(levels) = levels {
                cfg.levels = levels;
            }
            let study = converge(&cfg, common.out.as_deref())?;
            for (rows, cols) in study.tables.iter().zip(TABLES) {
                for row in rows {
                    let cells: Vec<String> = cols
                        .iter()
                        .zip(row.errors.iter().zip(&row.rates))
                        .map(|(q, (e, r))| match r {
                            Some(r) => format!("{q}={e:.3e} ({r:.2})"),
                            None => format!("{q}={e:.3e}"),
                        })
                        .collect();
                    println!("h={:e} {}", row.h, cells.join(" "));
                }
            }
        }
        Command::EnergyAudit { common, tol } => {
            let cfg = load(&common, Experiment::Custom)?;
            let sum = run_config(&cfg, common.out.as_deref())?;
            let worst = sum.ledger.max_relative_residual();
            let monotone = sum.ledger.is_non_increasing(tol);
            println!(
                "{} steps, max relative residual {worst:.3e}, energy non-increasing: {}",
                sum.ledger.entries.len(),
                if monotone { "yes" } else { "no" }
            );
            if worst.is_nan() || worst > tol || !monotone {
                return Err(ChnsError::Validation {
                    key: "energy identity".into(),
                    reason: format!("residual {worst:e} exceeds {tol:e} or energy increased"),
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chns: error: {e}");
            ExitCode::FAILURE
        }
    }
}
