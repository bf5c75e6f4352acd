use nalgebra::{DMatrix, DVector};

use super::linalg::{dot, norm};
use super::simplex::project_to_simplex;
use super::types::{GradientMatrix, WeightVector};
use crate::error::Result;

/// Largest agent count solved by exact face enumeration.
const MAX_ENUMERATED_AGENTS: usize = 12;
const PGD_TOL: f64 = 1e-10;
const PGD_MAX_ITER: usize = 100_000;

/// Minimiser of `‖Jγ‖` over the simplex and the attained value.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNorm {
    pub weights: WeightVector,
    pub value: f64,
}

/// Min-norm point of the convex hull of the gradient columns.
///
/// One column is trivial, two columns use the closed form, and up to
/// twelve columns are solved exactly by enumerating the faces of the simplex
/// (the optimum lies in the relative interior of some face, where it is the
/// affine-hull minimiser). Larger problems fall back to projected gradient
/// descent.
pub fn min_norm_weights(j: &GradientMatrix) -> Result<MinNorm> {
    let k = j.num_agents();
    let weights = match k {
        1 => WeightVector::from_raw(vec![1.0]),
        2 => two_column(j.column(0), j.column(1)),
        _ if j.columns().iter().all(|c| c.iter().all(|&x| x == 0.0)) => WeightVector::uniform(k),
        _ if k <= MAX_ENUMERATED_AGENTS => face_enumeration(j)?,
        _ => projected_gradient(j)?,
    };
    let value = norm(&j.combine(weights.as_slice())?);
    Ok(MinNorm { weights, value })
}

/// The Pareto gap `min_γ ‖Jγ‖`; zero iff some simplex weighting cancels.
pub fn pareto_gap(j: &GradientMatrix) -> Result<f64> {
    Ok(min_norm_weights(j)?.value)
}

fn two_column(g1: &[f64], g2: &[f64]) -> WeightVector {
    // minimise ‖a g1 + (1 - a) g2‖² over a ∈ [0, 1]
    let diff: Vec<f64> = g1.iter().zip(g2).map(|(a, b)| a - b).collect();
    let denom = dot(&diff, &diff);
    let a = if denom == 0.0 {
        0.5
    } else {
        (-dot(&diff, g2) / denom).clamp(0.0, 1.0)
    };
    WeightVector::from_raw(vec![a, 1.0 - a])
}

fn face_enumeration(j: &GradientMatrix) -> Result<WeightVector> {
    let k = j.num_agents();
    let gram = j.gram();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |w: Vec<f64>| -> Result<()> {
        let value = norm(&j.combine(&w)?);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, w));
        }
        Ok(())
    };

    for mask in 1u32..(1u32 << k) {
        let support: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let s = support.len();
        if s == 1 {
            consider(vertex(k, support[0]))?;
            continue;
        }
        // KKT system [G_S 1; 1ᵀ 0] [γ_S; μ] = [0; 1]
        let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
        for (a, &ia) in support.iter().enumerate() {
            for (b, &ib) in support.iter().enumerate() {
                kkt[(a, b)] = gram[ia][ib];
            }
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(s + 1);
        rhs[s] = 1.0;
        let Some(sol) = kkt.full_piv_lu().solve(&rhs) else {
            continue;
        };
        let local: Vec<f64> = sol.iter().take(s).copied().collect();
        if local.iter().any(|x| !x.is_finite() || *x < -1e-12) {
            continue;
        }
        let mut w = vec![0.0; k];
        for (&i, &x) in support.iter().zip(&local) {
            w[i] = x.max(0.0);
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= total);
        consider(project_to_simplex(&w)?.into_inner())?;
    }
    let (_, w) = best.expect("vertices are always candidates");
    Ok(WeightVector::from_raw(w))
}

fn vertex(k: usize, i: usize) -> Vec<f64> {
    let mut w = vec![0.0; k];
    w[i] = 1.0;
    w
}

fn projected_gradient(j: &GradientMatrix) -> Result<WeightVector> {
    let k = j.num_agents();
    let gram = j.gram();
    // step 1/L with L bounded by the trace of the Gram matrix
    let lipschitz: f64 = (0..k).map(|i| gram[i][i]).sum::<f64>().max(f64::MIN_POSITIVE);
    let step = 1.0 / lipschitz;
    let objective = |w: &[f64]| -> f64 {
        (0..k)
            .map(|a| w[a] * (0..k).map(|b| gram[a][b] * w[b]).sum::<f64>())
            .sum::<f64>()
    };
    let mut w = WeightVector::uniform(k).into_inner();
    let mut f = objective(&w);
    for _ in 0..PGD_MAX_ITER {
        let grad: Vec<f64> = (0..k)
            .map(|a| (0..k).map(|b| gram[a][b] * w[b]).sum::<f64>())
            .collect();
        let trial: Vec<f64> = w.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        let next = project_to_simplex(&trial)?.into_inner();
        let f_next = objective(&next);
        w = next;
        if (f - f_next).abs() <= PGD_TOL * f.abs().max(1.0) {
            break;
        }
        f = f_next;
    }
    Ok(WeightVector::from_raw(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn mat(cols: &[&[f64]]) -> GradientMatrix {
        GradientMatrix::from_columns(cols.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    /// 1-D grid search over a ∈ [0, 1] for two columns.
    fn grid_two(g1: &[f64], g2: &[f64]) -> (f64, f64) {
        (0..=100_000)
            .map(|n| {
                let a = n as f64 / 100_000.0;
                let v: Vec<f64> = g1.iter().zip(g2).map(|(x, y)| a * x + (1.0 - a) * y).collect();
                (a, norm(&v))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap()
    }

    #[test]
    fn two_column_examples() {
        let m = min_norm_weights(&mat(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(m.weights.as_slice(), &[0.5, 0.5]);
        assert!((m.value - 0.5f64.sqrt()).abs() < 1e-12);

        let m = min_norm_weights(&mat(&[&[1.0, 0.0], &[-1.0, 0.0]])).unwrap();
        assert_eq!(m.weights.as_slice(), &[0.5, 0.5]);
        assert_eq!(m.value, 0.0);

        let m = min_norm_weights(&mat(&[&[2.0, 0.0], &[1.0, 0.0]])).unwrap();
        let (a, v) = grid_two(&[2.0, 0.0], &[1.0, 0.0]);
        assert_eq!((a, v), (0.0, 1.0));
        assert_eq!(m.weights.as_slice(), &[0.0, 1.0]);
        assert_eq!(m.value, 1.0);
    }

    #[test]
    fn pareto_gap_examples() {
        let gap = pareto_gap(&mat(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, -1.0]])).unwrap();
        assert!(gap < 1e-12);
        let m = min_norm_weights(&mat(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, -1.0]])).unwrap();
        for w in m.weights.as_slice() {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }

        assert_eq!(pareto_gap(&mat(&[&[3.0, 4.0]])).unwrap(), 5.0);
        assert_eq!(pareto_gap(&GradientMatrix::zeros(4, 3)).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_collinear_columns() {
        // affinely dependent columns; optimum on an edge
        let m = min_norm_weights(&mat(&[&[1.0], &[2.0], &[3.0]])).unwrap();
        assert_eq!(m.value, 1.0);
        let m = min_norm_weights(&mat(&[&[1.0], &[-2.0], &[3.0]])).unwrap();
        assert!(m.value < 1e-12);
    }

    #[test]
    fn enumeration_agrees_with_projected_gradient() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let cols: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let j = GradientMatrix::from_columns(cols).unwrap();
            let exact = min_norm_weights(&j).unwrap().value;
            let pgd = norm(&j.combine(projected_gradient(&j).unwrap().as_slice()).unwrap());
            assert!(exact <= pgd + 1e-9, "exact {exact} pgd {pgd}");
            assert!(pgd - exact < 1e-3);
        }
    }

    #[test]
    fn large_agent_count_uses_projected_gradient() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let cols: Vec<Vec<f64>> = (0..16)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let j = GradientMatrix::from_columns(cols).unwrap();
        let m = min_norm_weights(&j).unwrap();
        let s: f64 = m.weights.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(m.value <= norm(&j.combine(WeightVector::uniform(16).as_slice()).unwrap()));
    }
}
