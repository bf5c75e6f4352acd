use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::controller::{
    build_task, coordinate, detect_goal, CoordinationLog, Environment, Plan, SemanticGoal,
    TaskSelection, Weighting,
};
use crate::error::{Error, Result};
use crate::moo_core::{
    c_error_bound, fit_g_error_scaling, generalization_error, log_log_slope,
    run_conflict_resolving, run_static_baseline, BoundInputs, IterationRecord, PopulationQuery,
    RunConfig, RunOutput, ScalingRun, StepSchedule, StochasticTask, WeightVector,
};
use crate::objectives::LinearGaussianTask;
use crate::simenv::{generate_traces, write_trace_set};

/// One metrics line of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub run_id: String,
    pub t: u64,
    pub gamma: Vec<f64>,
    pub losses: Vec<f64>,
    pub c_error: f64,
    pub c_error_time_avg: f64,
    pub g_error: Option<f64>,
    pub pareto_gap: f64,
}

pub fn metrics_records(run_id: &str, records: &[IterationRecord]) -> Vec<MetricsRecord> {
    let mut acc = 0.0;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            acc += r.c_error;
            MetricsRecord {
                run_id: run_id.to_string(),
                t: r.t,
                gamma: r.gamma.clone(),
                losses: r.losses.clone(),
                c_error: r.c_error,
                c_error_time_avg: acc / (i + 1) as f64,
                g_error: r.g_error,
                pareto_gap: r.pareto_gap,
            }
        })
        .collect()
}

pub fn write_metrics(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::json("metrics record", e))?;
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the request, band and bandwidth traces plus a manifest under
/// `<out>/traces`.
pub fn simulate_traces(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let set = generate_traces(&cfg.trace)?;
    write_trace_set(&set, &cfg.dataset, cfg.seed(), &cfg.output_root().join("traces"))
}

pub fn environment(cfg: &ExperimentConfig) -> Result<Environment> {
    Environment::generate(&cfg.trace, &cfg.dataset, cfg.seed())
}

#[derive(Debug)]
pub enum ScenarioOutcome {
    NoGoal,
    Coordinated { log: Box<CoordinationLog>, dir: PathBuf },
}

/// Goal detection through evaluation for one utterance, on the simulated
/// cross-layer task. Writes `metrics.jsonl` and `summary.json` under
/// `<out>/scenario`.
pub fn scenario(cfg: &ExperimentConfig, utterance: &str) -> Result<ScenarioOutcome> {
    let Some(goal) = detect_goal(utterance, &cfg.intents) else {
        return Ok(ScenarioOutcome::NoGoal);
    };
    let registry = cfg.registry()?;
    let plan = Plan::new(goal, &cfg.separation_table(), &registry)?;
    let env = environment(cfg)?;
    let coord = cfg.optimizer.coordination(Weighting::Dynamic(cfg.optimizer.variant));
    let seed = cfg.seed();
    let log = coordinate(&plan, &registry, &env, &TaskSelection::CrossLayer, &coord, seed)?;

    let dir = cfg.output_root().join("scenario");
    create_dir(&dir)?;
    let run_id = format!("scenario-seed{seed}");
    write_metrics(&dir.join("metrics.jsonl"), &metrics_records(&run_id, &log.records))?;
    write_json(&dir.join("summary.json"), &log.summary())?;
    Ok(ScenarioOutcome::Coordinated { log: Box::new(log), dir })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub t: u64,
    pub c_error_time_avg: f64,
    pub g_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub task: String,
    pub seeds: Vec<u64>,
    pub iterations: u64,
    pub runs: Vec<String>,
    /// Per-iteration C-error averaged over seeds.
    pub dynamic_c_error: Vec<f64>,
    pub static_c_error: Vec<f64>,
    /// Final time-averaged C-error averaged over seeds.
    pub dynamic_time_avg: f64,
    pub static_time_avg: f64,
    /// `dynamic_time_avg / static_time_avg`; 1 when both are within
    /// [`NO_CONFLICT_TOL`] of zero.
    pub ratio: f64,
    /// Dynamic runs: time-averaged C-error against G-error where measured.
    pub tradeoff: Vec<TradeoffPoint>,
}

/// Time-averaged C-errors at or below this are rounding residue: the
/// objectives do not conflict and the comparison ratio is reported as 1.
pub const NO_CONFLICT_TOL: f64 = 1e-12;

/// Output of [`compare_runs`] before anything is written.
#[derive(Debug, Clone)]
pub struct ComparedRun {
    pub seed: u64,
    pub dynamic: RunOutput,
    pub fixed: RunOutput,
}

/// Dynamic and equal-weight runs from the same seed, one pair per seed.
pub fn compare_runs<T, F>(make: F, settings: &super::OptimizerSettings) -> Result<Vec<ComparedRun>>
where
    T: StochasticTask,
    F: Fn(u64) -> Result<T> + Sync,
{
    settings
        .seeds
        .par_iter()
        .map(|&seed| {
            let task = make(seed)?;
            let cfg = RunConfig::new(settings.step_schedule(), settings.iterations, seed)
                .with_variant(settings.variant)
                .with_g_error_every(settings.g_error_every);
            let uniform = WeightVector::uniform(task.num_agents());
            Ok(ComparedRun {
                seed,
                dynamic: run_conflict_resolving(&task, &cfg)?,
                fixed: run_static_baseline(&task, &uniform, &cfg)?,
            })
        })
        .collect()
}

pub fn compare_report(task: &str, iterations: u64, runs: &[ComparedRun]) -> CompareReport {
    let n = runs.len() as f64;
    let mean_series = |pick: &dyn Fn(&ComparedRun) -> &RunOutput| -> Vec<f64> {
        (0..iterations as usize)
            .map(|t| runs.iter().map(|r| pick(r).records[t].c_error).sum::<f64>() / n)
            .collect()
    };
    let mean_final = |pick: &dyn Fn(&ComparedRun) -> &RunOutput| -> f64 {
        runs.iter().map(|r| pick(r).mean_c_error()).sum::<f64>() / n
    };
    let dynamic_time_avg = mean_final(&|r| &r.dynamic);
    let static_time_avg = mean_final(&|r| &r.fixed);
    let ratio = if dynamic_time_avg <= NO_CONFLICT_TOL && static_time_avg <= NO_CONFLICT_TOL {
        1.0
    } else {
        dynamic_time_avg / static_time_avg
    };

    let averages: Vec<Vec<f64>> = runs.iter().map(|r| r.dynamic.c_error_time_avg()).collect();
    let tradeoff = (0..iterations as usize)
        .filter_map(|t| {
            let gs: Option<Vec<f64>> = runs.iter().map(|r| r.dynamic.records[t].g_error).collect();
            gs.map(|gs| TradeoffPoint {
                t: t as u64,
                c_error_time_avg: averages.iter().map(|a| a[t]).sum::<f64>() / n,
                g_error: gs.iter().sum::<f64>() / n,
            })
        })
        .collect();

    CompareReport {
        task: task.into(),
        seeds: runs.iter().map(|r| r.seed).collect(),
        iterations,
        runs: runs
            .iter()
            .flat_map(|r| [format!("dynamic-seed{}", r.seed), format!("static-seed{}", r.seed)])
            .collect(),
        dynamic_c_error: mean_series(&|r| &r.dynamic),
        static_c_error: mean_series(&|r| &r.fixed),
        dynamic_time_avg,
        static_time_avg,
        ratio,
        tradeoff,
    }
}

/// Dynamic against equal-weight runs on the configured task, per seed.
/// Writes per-run metrics, `report.json` and two plot-ready CSV series
/// under `<out>/compare`.
pub fn compare(cfg: &ExperimentConfig) -> Result<CompareReport> {
    if cfg.optimizer.seeds.len() < 2 {
        return Err(Error::config("compare needs at least two seeds"));
    }
    let opt = &cfg.optimizer;
    let (name, runs) = match cfg.task.oracle(0)? {
        Some(_) => (
            "quadratic-oracle",
            compare_runs(|seed| Ok(cfg.task.oracle(seed)?.expect("oracle task")), opt)?,
        ),
        None => {
            let registry = cfg.registry()?;
            let env = environment(cfg)?;
            let plan = Plan::new(first_goal(cfg)?, &cfg.separation_table(), &registry)?;
            let coord = opt.coordination(Weighting::Dynamic(opt.variant));
            (
                "crosslayer-sim",
                compare_runs(|seed| build_task(&plan, &registry, &env, &coord, seed), opt)?,
            )
        }
    };
    let report = compare_report(name, opt.iterations, &runs);

    let dir = cfg.output_root().join("compare");
    create_dir(&dir)?;
    for r in &runs {
        for (label, out) in [("dynamic", &r.dynamic), ("static", &r.fixed)] {
            let id = format!("{label}-seed{}", r.seed);
            let run_dir = dir.join(&id);
            create_dir(&run_dir)?;
            write_metrics(&run_dir.join("metrics.jsonl"), &metrics_records(&id, &out.records))?;
        }
    }
    write_json(&dir.join("report.json"), &report)?;
    let mut csv = String::from("t,dynamic,static\n");
    for (t, (d, s)) in report.dynamic_c_error.iter().zip(&report.static_c_error).enumerate() {
        csv.push_str(&format!("{t},{d},{s}\n"));
    }
    let path = dir.join("c_error.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    let mut csv = String::from("t,c_error_time_avg,g_error\n");
    for p in &report.tradeoff {
        csv.push_str(&format!("{},{},{}\n", p.t, p.c_error_time_avg, p.g_error));
    }
    let path = dir.join("tradeoff.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

fn first_goal(cfg: &ExperimentConfig) -> Result<SemanticGoal> {
    let intent = cfg
        .intents
        .intents
        .first()
        .ok_or_else(|| Error::config("intent table is empty"))?;
    Ok(SemanticGoal {
        id: intent.goal.clone(),
        description: intent.description.clone(),
        matched_prompt: intent.prompts.first().cloned().unwrap_or_default(),
        task_index: intent.task_index,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub eta: f64,
    pub beta: f64,
    pub t: u64,
    /// Time-averaged C-error, largest over seeds.
    pub measured: f64,
    /// Bound with the constants of that seed's oracle, smallest over seeds.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub expected: [f64; 2],
    pub within: bool,
}

impl SlopeFit {
    fn new(xs: Vec<f64>, ys: Vec<f64>, slope: f64, expected: [f64; 2]) -> Self {
        let within = expected[0] <= slope && slope <= expected[1];
        Self { xs, ys, slope, expected, within }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lf: f64,
    pub lfp: f64,
    pub sweep: Vec<SweepResult>,
    /// Time-averaged C-error against `T` under the theory schedule.
    pub c_error_rate: SlopeFit,
    /// Final G-error against the training-set size on the linear-Gaussian task.
    pub g_error_scaling: SlopeFit,
    pub all_bounds_hold: bool,
}

pub const C_RATE_RANGE: [f64; 2] = [-0.45, -0.10];
pub const G_SCALING_RANGE: [f64; 2] = [-0.65, -0.35];

/// Checks measured C-errors against the bound on a sweep, fits the C-error
/// rate and the G-error scaling. Writes `<out>/bounds/report.json`.
pub fn verify_bounds(cfg: &ExperimentConfig) -> Result<BoundReport> {
    let b = &cfg.bounds;
    let seeds = &cfg.optimizer.seeds;
    let oracle0 = cfg.task.oracle(seeds[0])?.ok_or_else(|| {
        Error::config("verify-bounds needs the quadratic-oracle task (constants must be computable)")
    })?;
    let (lf, lfp) = oracle0.lipschitz_constants();

    let sweep = b
        .sweep
        .par_iter()
        .map(|p| {
            let mut measured = 0.0f64;
            let mut bound = f64::INFINITY;
            let mut pass = true;
            for &seed in seeds {
                let oracle = cfg.task.oracle(seed)?.expect("oracle task");
                let (lf, lfp) = oracle.lipschitz_constants();
                let run_cfg = RunConfig::new(StepSchedule::constant(p.eta, p.beta), p.t, seed)
                    .with_g_error_every(0);
                let m = run_conflict_resolving(&oracle, &run_cfg)?.mean_c_error();
                let bnd = c_error_bound(&BoundInputs {
                    lf,
                    lfp,
                    u: lf,
                    d: oracle.samples_per_agent() as u64,
                    t: p.t,
                    eta: p.eta,
                    beta: p.beta,
                })?;
                pass &= m <= bnd;
                measured = measured.max(m);
                bound = bound.min(bnd);
            }
            Ok(SweepResult { eta: p.eta, beta: p.beta, t: p.t, measured, bound, pass })
        })
        .collect::<Result<Vec<_>>>()?;

    let c_error_rate = c_error_rate(cfg)?;
    let g_error_scaling = g_error_scaling(cfg)?;
    let report = BoundReport {
        lf,
        lfp,
        all_bounds_hold: sweep.iter().all(|s| s.pass),
        sweep,
        c_error_rate,
        g_error_scaling,
    };
    let dir = cfg.output_root().join("bounds");
    create_dir(&dir)?;
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

/// Mean time-averaged C-error per horizon under the theory schedule, and
/// the log-log slope against `T`.
pub fn c_error_rate(cfg: &ExperimentConfig) -> Result<SlopeFit> {
    let b = &cfg.bounds;
    let opt = &cfg.optimizer;
    let ys = b
        .rate_horizons
        .iter()
        .map(|&t| {
            let vals = (0..b.rate_seeds)
                .into_par_iter()
                .map(|seed| {
                    let oracle = cfg.task.oracle(seed)?.ok_or_else(|| {
                        Error::config("the C-error rate fit needs the quadratic-oracle task")
                    })?;
                    let schedule = StepSchedule::theory(opt.eta0, opt.beta0, t);
                    let run_cfg = RunConfig::new(schedule, t, seed)
                        .with_variant(opt.variant)
                        .with_g_error_every(0);
                    Ok(run_conflict_resolving(&oracle, &run_cfg)?.mean_c_error())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = b.rate_horizons.iter().map(|&t| t as f64).collect();
    let slope = log_log_slope(&xs, &ys)?;
    Ok(SlopeFit::new(xs, ys, slope, C_RATE_RANGE))
}

/// Per-agent regression targets of the G-error scaling experiment.
pub fn scaling_thetas() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, -0.5, 0.25, 0.0],
        vec![-0.75, 1.0, 0.0, 0.5],
        vec![0.25, 0.25, -1.0, -0.5],
    ]
}

/// G-error at the final iterate of a run on the linear-Gaussian task.
pub fn final_g_error(d: usize, noise_std: f64, horizon: u64, seed: u64, opt: &super::OptimizerSettings) -> Result<f64> {
    let task = LinearGaussianTask::new(scaling_thetas(), noise_std, d, seed)?;
    let schedule = StepSchedule::theory(opt.eta0, opt.beta0, horizon);
    let run_cfg = RunConfig::new(schedule, horizon, seed)
        .with_variant(opt.variant)
        .with_g_error_every(0);
    let out = run_conflict_resolving(&task, &run_cfg)?;
    let last = out.final_state();
    let full = task.full_gradients(&last.model)?;
    let pop = task
        .population_gradients(&last.model, PopulationQuery { seed, iteration: horizon })?
        .expect("closed-form population gradients");
    generalization_error(&full, &pop, &last.gamma)
}

/// Mean final G-error per training-set size, and the fitted slope against D.
pub fn g_error_scaling(cfg: &ExperimentConfig) -> Result<SlopeFit> {
    let b = &cfg.bounds;
    let runs = b
        .g_sizes
        .iter()
        .map(|&d| {
            let vals = (0..b.g_seeds)
                .into_par_iter()
                .map(|seed| final_g_error(d as usize, b.g_noise_std, b.g_horizon, seed, &cfg.optimizer))
                .collect::<Result<Vec<f64>>>()?;
            Ok(ScalingRun {
                t: b.g_horizon,
                d,
                g_error: vals.iter().sum::<f64>() / vals.len() as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = fit_g_error_scaling(&runs)?
        .d_slope
        .ok_or_else(|| Error::config("G-error scaling needs at least two training-set sizes"))?;
    Ok(SlopeFit::new(
        runs.iter().map(|r| r.d as f64).collect(),
        runs.iter().map(|r| r.g_error).collect(),
        slope,
        G_SCALING_RANGE,
    ))
}
