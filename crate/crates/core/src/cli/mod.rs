//! Experiment runner behind the `xlayer` binary.
//!
//! Precedence for every setting: command-line flag, then the config
//! document, then built-in defaults. The output root additionally falls
//! back to the `XLAYER_OUT_DIR` environment variable before `xlayer-out`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use commands::{
    c_error_rate, compare, compare_report, compare_runs, environment, final_g_error,
    g_error_scaling, metrics_records, scaling_thetas, scenario, simulate_traces, verify_bounds,
    write_metrics, BoundReport, CompareReport, ComparedRun, MetricsRecord, ScenarioOutcome,
    SlopeFit, SweepResult, TradeoffPoint, C_RATE_RANGE, G_SCALING_RANGE, NO_CONFLICT_TOL,
};
pub use config::{
    AgentsSource, BoundsConfig, ExperimentConfig, OptimizerSettings, Overrides, SweepPoint,
    TaskConfig, OUT_DIR_ENV,
};

use crate::error::Error;
use crate::moo_core::WeightUpdate;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Status {
    Success = 0,
    Failure = 1,
    ConfigError = 2,
    NoGoal = 3,
    Unsatisfiable = 4,
    BoundViolation = 5,
    Unfulfilled = 6,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn for_error(err: &Error) -> Self {
        match err {
            Error::Config(_) | Error::InvalidInput(_) | Error::Json { .. } => Status::ConfigError,
            Error::UnsatisfiableSubtask { .. } => Status::Unsatisfiable,
            _ => Status::Failure,
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

#[derive(Debug, Parser)]
#[command(name = "xlayer", version, about = "Conflict-resolving cross-layer agent experiments")]
pub struct Cli {
    /// Experiment config (JSON); built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Replaces the first configured seed (and the trace seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Weight update: `matrix` or `literal-diagonal`.
    #[arg(long, global = true)]
    pub variant: Option<WeightUpdate>,
    /// Iteration count.
    #[arg(long = "T", global = true)]
    pub iterations: Option<u64>,
    #[arg(long, global = true)]
    pub eta0: Option<f64>,
    #[arg(long, global = true)]
    pub beta0: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write request, band and bandwidth traces plus a manifest.
    SimulateTraces,
    /// Run one utterance through goal detection, coordination and evaluation.
    Scenario {
        utterance: String,
    },
    /// Dynamic against equal-weight runs over the configured seeds.
    Compare,
    /// Check measured C-errors against the bound and fit the rates.
    VerifyBounds,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            variant: self.variant,
            iterations: self.iterations,
            eta0: self.eta0,
            beta0: self.beta0,
        }
    }

    pub fn load_config(&self) -> crate::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

/// Runs a parsed command line, printing results and errors.
pub fn run(cli: Cli) -> Status {
    match execute(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            Status::for_error(&e)
        }
    }
}

fn execute(cli: &Cli) -> crate::Result<Status> {
    let cfg = cli.load_config()?;
    match &cli.command {
        Command::SimulateTraces => {
            for p in simulate_traces(&cfg)? {
                println!("{}", p.display());
            }
            Ok(Status::Success)
        }
        Command::Scenario { utterance } => match scenario(&cfg, utterance)? {
            ScenarioOutcome::NoGoal => {
                eprintln!("no goal recognised in {utterance:?}");
                Ok(Status::NoGoal)
            }
            ScenarioOutcome::Coordinated { log, dir } => {
                println!("goal {} -> {}", log.goal.id, dir.display());
                for r in &log.reports {
                    let value = r.action_value.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
                    println!("  {} {}: {} = {value} ({:?})", r.agent_id, r.subtask_id, r.action, r.status);
                }
                if log.fulfilled() {
                    println!("fulfilled");
                    Ok(Status::Success)
                } else {
                    let failed = log.verdict.as_ref().map(|v| v.failed_subtasks.clone()).unwrap_or_default();
                    println!("not fulfilled: {failed:?}");
                    Ok(Status::Unfulfilled)
                }
            }
        },
        Command::Compare => {
            let r = compare(&cfg)?;
            println!(
                "{}: time-averaged C-error dynamic {:.6} static {:.6} ratio {:.4}",
                r.task, r.dynamic_time_avg, r.static_time_avg, r.ratio
            );
            Ok(Status::Success)
        }
        Command::VerifyBounds => {
            let r = verify_bounds(&cfg)?;
            for s in &r.sweep {
                println!(
                    "eta={} beta={} T={}: measured {:.4e} bound {:.4e} {}",
                    s.eta,
                    s.beta,
                    s.t,
                    s.measured,
                    s.bound,
                    if s.pass { "ok" } else { "VIOLATED" }
                );
            }
            let fit = |name: &str, f: &SlopeFit| {
                println!(
                    "{name} slope {:.3} (expected {:?}) {}",
                    f.slope,
                    f.expected,
                    if f.within { "ok" } else { "outside" }
                )
            };
            fit("C-error vs T", &r.c_error_rate);
            fit("G-error vs D", &r.g_error_scaling);
            if r.all_bounds_hold {
                Ok(Status::Success)
            } else {
                Ok(Status::BoundViolation)
            }
        }
    }
}
