//! G-error against training-set size on the linear-Gaussian task, where the
//! population gradient is known in closed form.
use xlayer::cli::{final_g_error, OptimizerSettings};
use xlayer::moo_core::log_log_slope;

fn main() -> xlayer::Result<()> {
    let settings = OptimizerSettings::default();
    let sizes = [100u64, 1000, 10_000];
    let mut means = Vec::new();
    for &d in &sizes {
        let runs: Vec<f64> = (0..5)
            .map(|seed| final_g_error(d as usize, 1.0, 200, seed, &settings))
            .collect::<xlayer::Result<_>>()?;
        let mean = runs.iter().sum::<f64>() / runs.len() as f64;
        println!("D = {d:>6}: G-error {mean:.4e}");
        means.push(mean);
    }
    let xs: Vec<f64> = sizes.iter().map(|&d| d as f64).collect();
    println!("slope in D: {:.3}", log_log_slope(&xs, &means)?);
    Ok(())
}
