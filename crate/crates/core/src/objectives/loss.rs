use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-sample regression loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    L1,
    #[serde(rename = "MSE")]
    Mse,
    LogCosh,
}

/// `(loss, ∂loss/∂prediction)` for one sample.
///
/// The L1 subgradient at zero residual is 0.
pub fn loss_and_gradient(kind: LossKind, prediction: f64, target: f64) -> Result<(f64, f64)> {
    if !(prediction.is_finite() && target.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite loss input: prediction {prediction}, target {target}"
        )));
    }
    let e = prediction - target;
    Ok(match kind {
        LossKind::L1 => (e.abs(), if e == 0.0 { 0.0 } else { e.signum() }),
        LossKind::Mse => (e * e, 2.0 * e),
        LossKind::LogCosh => (log_cosh(e), e.tanh()),
    })
}

/// `log cosh(e)` without overflow for large `|e|`.
fn log_cosh(e: f64) -> f64 {
    let a = e.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(loss_and_gradient(LossKind::Mse, 0.7, 0.7).unwrap(), (0.0, 0.0));
        assert_eq!(loss_and_gradient(LossKind::L1, 1.0, 0.0).unwrap(), (1.0, 1.0));
        let (l, g) = loss_and_gradient(LossKind::LogCosh, 1.5, 0.5).unwrap();
        assert!((l - 1f64.cosh().ln()).abs() < 1e-15);
        assert!((l - 0.43378).abs() < 1e-5);
        assert!((g - 0.76159).abs() < 1e-5);
        assert!(loss_and_gradient(LossKind::L1, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn shape_properties() {
        for kind in [LossKind::L1, LossKind::Mse, LossKind::LogCosh] {
            assert_eq!(loss_and_gradient(kind, 2.0, 2.0).unwrap().0, 0.0);
            for i in -1000..=1000 {
                let e = i as f64 / 100.0;
                let (l, _) = loss_and_gradient(kind, e, 0.0).unwrap();
                let (lm, _) = loss_and_gradient(kind, -e, 0.0).unwrap();
                assert!(l >= 0.0);
                assert_eq!(l, lm);
                if e != 0.0 {
                    assert!(l > 0.0);
                }
            }
        }
    }

    #[test]
    fn log_cosh_sandwich() {
        for i in -1000..=1000 {
            let e = i as f64 / 100.0;
            let (l, _) = loss_and_gradient(LossKind::LogCosh, e, 0.0).unwrap();
            assert!(l <= e.abs() + 1e-15);
            assert!(l <= e * e / 2.0 + 1e-15);
        }
        let (l, _) = loss_and_gradient(LossKind::LogCosh, 800.0, 0.0).unwrap();
        assert!(l.is_finite());
    }

    #[test]
    fn json_tags() {
        assert_eq!(serde_json::to_string(&LossKind::Mse).unwrap(), "\"MSE\"");
        assert_eq!(serde_json::from_str::<LossKind>("\"LogCosh\"").unwrap(), LossKind::LogCosh);
    }
}
