//! Time-averaged C-error and G-error along one run on the cross-layer task,
//! sampled every tenth of the horizon.
use xlayer::cli::ExperimentConfig;
use xlayer::controller::{build_task, detect_goal, Environment, Plan, Weighting};
use xlayer::moo_core::{run_conflict_resolving, RunConfig, StepSchedule, WeightUpdate};

fn main() -> xlayer::Result<()> {
    let t_max: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let mut cfg = ExperimentConfig::default();
    cfg.trace.duration = 600;
    let registry = cfg.registry()?;
    let goal = detect_goal("make video clearer", &cfg.intents).expect("known prompt");
    let plan = Plan::new(goal, &cfg.separation_table(), &registry)?;
    let env = Environment::generate(&cfg.trace, &cfg.dataset, 0)?;
    let coord = cfg.optimizer.coordination(Weighting::Dynamic(WeightUpdate::Matrix));
    let task = build_task(&plan, &registry, &env, &coord, 0)?;

    let run = RunConfig::new(StepSchedule::constant(1.0, 0.01), t_max, 0).with_g_error_every(t_max / 10);
    let out = run_conflict_resolving(&task, &run)?;
    let avg = out.c_error_time_avg();
    println!("{:>6} {:>12} {:>12}", "t", "avg C-error", "G-error");
    for r in out.records.iter().filter(|r| r.g_error.is_some()) {
        println!("{:>6} {:>12.4e} {:>12.4e}", r.t, avg[r.t as usize], r.g_error.unwrap_or(f64::NAN));
    }
    Ok(())
}
