//! A controller session: utterances are queued as goals and coordinated in
//! arrival order. Uses the quadratic stand-in objective to stay fast.
use xlayer::cli::ExperimentConfig;
use xlayer::controller::{Controller, CoordinationConfig, Environment, GoalQueue, TaskSelection};
use xlayer::objectives::QuadraticOracle;

fn main() -> xlayer::Result<()> {
    let cfg = ExperimentConfig::default();
    let mut controller = Controller::new(cfg.intents.clone(), cfg.separation_table(), cfg.registry()?)?
        .with_queue(GoalQueue::new(2));

    for u in ["Make video clearer please", "what's the weather", "increase video resolution", "make video clearer"] {
        match controller.submit(u) {
            Ok(Some(goal)) => println!("queued {:<12} from {u:?}", goal.id),
            Ok(None) => println!("ignored {u:?}"),
            Err(e) => println!("rejected {u:?}: {e}"),
        }
    }

    let env = Environment::generate(&cfg.trace.clone().with_duration(600), &cfg.dataset, 1)?;
    let selection = TaskSelection::Quadratic(QuadraticOracle::conflicting(200, 0.1, 1)?);
    let coord = CoordinationConfig { iterations: 200, ..Default::default() };
    for (i, log) in controller.run_pending(&env, &selection, &coord, 1).into_iter().enumerate() {
        let log = log?;
        println!("goal {i}: {} fulfilled={} after {} iterations", log.goal.id, log.fulfilled(), log.records.len());
    }
    Ok(())
}
