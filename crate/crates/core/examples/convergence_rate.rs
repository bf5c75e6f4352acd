//! Fits the decay exponent of the time-averaged C-error in `T` under the
//! theory step sizes (`η ∝ T^{-1/4}`, `β ∝ T^{-3/4}`).
use xlayer::moo_core::{log_log_slope, run_conflict_resolving, RunConfig, StepSchedule};
use xlayer::objectives::QuadraticOracle;

fn main() -> xlayer::Result<()> {
    let horizons = [256u64, 1024, 4096];
    let seeds = 5;
    let mut means = Vec::new();
    for &t in &horizons {
        let mut total = 0.0;
        for seed in 0..seeds {
            let oracle = QuadraticOracle::conflicting(1000, 0.1, seed)?;
            let cfg = RunConfig::new(StepSchedule::theory(0.5, 0.1, t), t, seed).with_g_error_every(0);
            total += run_conflict_resolving(&oracle, &cfg)?.mean_c_error();
        }
        means.push(total / seeds as f64);
        println!("T = {t:>5}: {:.4e}", means.last().unwrap());
    }
    let xs: Vec<f64> = horizons.iter().map(|&t| t as f64).collect();
    println!("log-log slope {:.3}", log_log_slope(&xs, &means)?);
    Ok(())
}
