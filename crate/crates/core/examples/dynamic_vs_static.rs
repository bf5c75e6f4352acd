//! Dynamic weighting against fixed equal weights on the conflicting
//! quadratic task, over several seeds.
//!
//! ```text
//! cargo run --release --example dynamic_vs_static -- 5000 10
//! ```
use xlayer::cli::{compare_report, compare_runs, OptimizerSettings};
use xlayer::objectives::QuadraticOracle;

fn main() -> xlayer::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);

    let settings = OptimizerSettings {
        iterations,
        seeds: (0..seeds).collect(),
        g_error_every: 0,
        ..Default::default()
    };
    let runs = compare_runs(|seed| QuadraticOracle::conflicting(1000, 0.1, seed), &settings)?;
    let report = compare_report("quadratic-oracle", iterations, &runs);

    println!("T = {iterations}, {seeds} seeds");
    for t in [0, iterations / 100, iterations / 10, iterations - 1] {
        let t = t as usize;
        println!(
            "  t = {t:>6}: mean C-error dynamic {:.4e}  static {:.4e}",
            report.dynamic_c_error[t], report.static_c_error[t]
        );
    }
    println!(
        "time-averaged C-error: dynamic {:.4e}, static {:.4e}, ratio {:.3}",
        report.dynamic_time_avg, report.static_time_avg, report.ratio
    );
    Ok(())
}
