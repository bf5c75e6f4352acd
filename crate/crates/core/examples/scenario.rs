//! One utterance end to end: goal detection, task separation, agent
//! selection, conflict-mediated training of the shared predictor, subtask
//! execution and the verdict.
use xlayer::cli::ExperimentConfig;
use xlayer::controller::{coordinate, detect_goal, Environment, Plan, TaskSelection, Weighting};
use xlayer::moo_core::WeightUpdate;

fn main() -> xlayer::Result<()> {
    let utterance = std::env::args().nth(1).unwrap_or_else(|| "make video clearer".into());
    let cfg = ExperimentConfig::default();
    let registry = cfg.registry()?;

    let Some(goal) = detect_goal(&utterance, &cfg.intents) else {
        println!("no goal in {utterance:?}");
        return Ok(());
    };
    println!("goal: {} ({})", goal.id, goal.description);
    let plan = Plan::new(goal, &cfg.separation_table(), &registry)?;
    for s in &plan.subtasks {
        println!("  {} -> {}: {}", s.id, plan.assignment.agent_for(&s.id).unwrap_or("?"), s.requirement);
    }

    let env = Environment::generate(&cfg.trace, &cfg.dataset, 0)?;
    let coord = cfg.optimizer.coordination(Weighting::Dynamic(WeightUpdate::Matrix));
    let log = coordinate(&plan, &registry, &env, &TaskSelection::CrossLayer, &coord, 0)?;

    let first = &log.records[0];
    let last = log.records.last().expect("at least one iteration");
    println!("losses {:.4?} -> {:.4?}", first.losses, last.losses);
    println!("weights {:.3?} -> {:.3?}", first.gamma, last.gamma);
    for r in &log.reports {
        println!("  {:<7} {:?}: {} (value {:?})", r.agent_id, r.status, r.action, r.action_value);
    }
    println!("fulfilled: {}", log.fulfilled());
    Ok(())
}
