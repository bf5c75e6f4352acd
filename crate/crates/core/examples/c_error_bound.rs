//! Measured time-averaged C-error against the analytic bound for a small
//! sweep of constant step sizes.
use xlayer::moo_core::{c_error_bound, run_conflict_resolving, BoundInputs, RunConfig, StepSchedule};
use xlayer::objectives::QuadraticOracle;

fn main() -> xlayer::Result<()> {
    let oracle = QuadraticOracle::conflicting(1000, 0.1, 0)?;
    let (lf, lfp) = oracle.lipschitz_constants();
    println!("l_f = {lf:.3}, l'_f = {lfp:.3}");
    for (eta, beta, t) in [(0.05, 0.001, 500), (0.2, 0.01, 1000), (0.5, 0.05, 2000)] {
        let cfg = RunConfig::new(StepSchedule::constant(eta, beta), t, 0).with_g_error_every(0);
        let measured = run_conflict_resolving(&oracle, &cfg)?.mean_c_error();
        let bound = c_error_bound(&BoundInputs { lf, lfp, u: lf, d: 1000, t, eta, beta })?;
        println!("eta {eta:<5} beta {beta:<6} T {t:<5} measured {measured:.3e}  bound {bound:.3e}");
    }
    Ok(())
}
