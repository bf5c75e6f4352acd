use super::linalg::all_finite;
use super::types::WeightVector;
use super::SIMPLEX_TOL;
use crate::error::{Error, Result};

/// Euclidean projection onto the probability simplex (sort and threshold).
///
/// Inputs already on the simplex are returned unchanged, which makes the
/// projection exactly idempotent.
pub fn project_to_simplex(v: &[f64]) -> Result<WeightVector> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if !all_finite(v) {
        return Err(Error::invalid("cannot project a vector with non-finite entries"));
    }
    if v.len() == 1 {
        return Ok(WeightVector::from_raw(vec![1.0]));
    }
    let sum: f64 = v.iter().sum();
    if v.iter().all(|&x| x >= 0.0) && (sum - 1.0).abs() <= SIMPLEX_TOL {
        return Ok(WeightVector::from_raw(v.to_vec()));
    }

    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    Ok(WeightVector::from_raw(
        v.iter().map(|&x| (x - theta).max(0.0)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exact projection by enumerating supports: on support `S` the nearest
    /// point of the affine hull is `v_S - (Σ v_S - 1)/|S|`.
    fn support_enumeration(v: &[f64]) -> Vec<f64> {
        let k = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1 << k) {
            let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            let s: f64 = idx.iter().map(|&i| v[i]).sum();
            let shift = (s - 1.0) / idx.len() as f64;
            let mut w = vec![0.0; k];
            let mut ok = true;
            for &i in &idx {
                w[i] = v[i] - shift;
                if w[i] < -1e-15 {
                    ok = false;
                }
            }
            if !ok {
                continue;
            }
            let d: f64 = v.iter().zip(&w).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, w));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn fixed_points_and_examples() {
        let third = 1.0 / 3.0;
        let p = project_to_simplex(&[third, third, third]).unwrap();
        assert_eq!(p.as_slice(), &[third, third, third]);

        let p = project_to_simplex(&[0.6, 0.6, 0.6]).unwrap();
        for w in p.as_slice() {
            assert!((w - third).abs() < 1e-15);
        }

        let p = project_to_simplex(&[1.5, 0.2, -0.4]).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(support_enumeration(&[1.5, 0.2, -0.4]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(project_to_simplex(&[]).is_err());
        assert!(project_to_simplex(&[1.0, f64::NAN]).is_err());
        assert!(project_to_simplex(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn single_coordinate_is_exactly_one() {
        assert_eq!(project_to_simplex(&[0.3]).unwrap().as_slice(), &[1.0]);
        assert_eq!(project_to_simplex(&[-7.0]).unwrap().as_slice(), &[1.0]);
    }

    proptest! {
        #[test]
        fn output_on_simplex_and_idempotent(v in prop::collection::vec(-5.0f64..5.0, 1..8)) {
            let p = project_to_simplex(&v).unwrap();
            prop_assert!(p.as_slice().iter().all(|&w| w >= 0.0));
            let s: f64 = p.as_slice().iter().sum();
            prop_assert!((s - 1.0).abs() <= SIMPLEX_TOL);
            let q = project_to_simplex(p.as_slice()).unwrap();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn matches_support_enumeration(v in prop::collection::vec(-2.0f64..2.0, 2..7)) {
            let p = project_to_simplex(&v).unwrap();
            let o = support_enumeration(&v);
            for (a, b) in p.as_slice().iter().zip(&o) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nearest_among_grid_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let steps = 100;
        let mut grid = Vec::new();
        for a in 0..=steps {
            for b in 0..=(steps - a) {
                let (x, y) = (a as f64 / steps as f64, b as f64 / steps as f64);
                grid.push([x, y, 1.0 - x - y]);
            }
        }
        let dist = |v: &[f64], w: &[f64]| -> f64 {
            v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        };
        for _ in 0..1000 {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = project_to_simplex(&v).unwrap();
            let dp = dist(&v, p.as_slice());
            for w in &grid {
                assert!(dp <= dist(&v, w) + 1e-9);
            }
        }
    }
}
