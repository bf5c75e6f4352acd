use crate::error::{Error, Result};

/// Compares an analytic gradient with central differences of `f` at `x`.
///
/// Returns `max_j |analytic_j − numeric_j| / max(1, |analytic_j|)`.
pub fn finite_difference_check<F>(f: F, analytic: &[f64], x: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    if analytic.len() != x.len() {
        return Err(Error::invalid("analytic gradient and point differ in dimension"));
    }
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let up = f(&probe)?;
        probe[j] = x[j] - h;
        let down = f(&probe)?;
        probe[j] = x[j];
        if !(up.is_finite() && down.is_finite()) {
            return Err(Error::invalid(format!("non-finite evaluation along coordinate {j}")));
        }
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((analytic[j] - numeric).abs() / analytic[j].abs().max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square() {
        let err = finite_difference_check(|x| Ok(x[0] * x[0]), &[6.0], &[3.0], 1e-5).unwrap();
        assert!(err <= 1e-9);
    }

    #[test]
    fn detects_wrong_gradient() {
        let err = finite_difference_check(|x| Ok(x[0] * x[0]), &[5.0], &[3.0], 1e-5).unwrap();
        assert!(err > 0.1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(finite_difference_check(|_| Ok(0.0), &[0.0], &[0.0], 0.0).is_err());
        assert!(finite_difference_check(|_| Ok(f64::NAN), &[0.0], &[0.0], 1e-3).is_err());
    }
}
