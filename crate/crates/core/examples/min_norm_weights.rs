//! Pareto-stationary (min-norm) weights for a few gradient matrices, and the
//! conflict error of uniform weights against them.
use xlayer::moo_core::{conflict_error, min_norm_weights, GradientMatrix, WeightVector};

fn main() -> xlayer::Result<()> {
    let cases = [
        ("orthogonal", vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        ("opposed", vec![vec![1.0, 0.0], vec![-1.0, 0.0]]),
        ("aligned", vec![vec![2.0, 0.0], vec![1.0, 0.0]]),
        ("balanced triple", vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]]),
        ("skewed triple", vec![vec![3.0, 1.0, 0.0], vec![-1.0, 2.0, 0.5], vec![0.5, -2.0, 1.0]]),
    ];
    for (name, cols) in cases {
        let k = cols.len();
        let j = GradientMatrix::from_columns(cols)?;
        let star = min_norm_weights(&j)?;
        let e = conflict_error(&j, &WeightVector::uniform(k), &star.weights)?;
        println!(
            "{name:>16}: gamma* = {:.4?}, gap = {:.4}, C-error of uniform weights = {e:.4}",
            star.weights.as_slice(),
            star.value
        );
    }
    Ok(())
}
