use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants entering the C-error bound and the G-error order term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Lipschitz constant of the per-sample losses.
    pub lf: f64,
    /// Lipschitz constant of the per-sample gradients.
    pub lfp: f64,
    /// Bound on the Frobenius norm of the weighted gradient sum.
    pub u: f64,
    /// Training-set size.
    pub d: u64,
    /// Iterations.
    pub t: u64,
    pub eta: f64,
    pub beta: f64,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lf", self.lf),
            ("lfp", self.lfp),
            ("u", self.u),
            ("eta", self.eta),
            ("beta", self.beta),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.d == 0 || self.t == 0 {
            return Err(Error::invalid("d and t must be positive"));
        }
        Ok(())
    }
}

/// Upper bound on the C-error of the dynamic-weighting algorithm:
/// `4/(ηT) + 6·sqrt(3 ℓ'_f ℓ_f² β/η) + 3 η ℓ_f⁴`.
pub fn c_error_bound(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    let transient = 4.0 / (b.eta * b.t as f64);
    let coupling = 6.0 * (3.0 * b.lfp * b.lf * b.lf * b.beta / b.eta).sqrt();
    let noise = 3.0 * b.eta * b.lf.powi(4);
    Ok(transient + coupling + noise)
}

/// The `U·sqrt(T/D)` order term of the G-error bound (constants omitted).
pub fn g_error_order(b: &BoundInputs) -> Result<f64> {
    b.validate()?;
    Ok(b.u * (b.t as f64 / b.d as f64).sqrt())
}

/// One measured G-error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub t: u64,
    pub d: u64,
    pub g_error: f64,
}

/// Fitted log-log exponents of the G-error in `D` (at fixed `T`) and in `T`
/// (at fixed `D`). A side is `None` when the runs do not vary it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub d_slope: Option<f64>,
    pub t_slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("slope fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::invalid("log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Fits the G-error exponents from a sweep of runs.
///
/// Runs are grouped by the held-fixed variable; the group with the most
/// distinct values of the varied variable is used (ties go to the smaller
/// fixed value). A side needs at least three distinct values.
pub fn fit_g_error_scaling(runs: &[ScalingRun]) -> Result<ScalingFit> {
    if runs.len() < 3 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 3 runs, got {}",
            runs.len()
        )));
    }
    if let Some(r) = runs.iter().find(|r| !(r.g_error.is_finite() && r.g_error > 0.0)) {
        return Err(Error::invalid(format!(
            "G-error must be positive, got {} at T={} D={}",
            r.g_error, r.t, r.d
        )));
    }
    let d_slope = fit_side(runs, |r| r.t, |r| r.d)?;
    let t_slope = fit_side(runs, |r| r.d, |r| r.t)?;
    if d_slope.is_none() && t_slope.is_none() {
        return Err(Error::invalid(
            "runs must vary D at fixed T (or T at fixed D) over at least 3 values",
        ));
    }
    Ok(ScalingFit { d_slope, t_slope })
}

fn fit_side(
    runs: &[ScalingRun],
    fixed: impl Fn(&ScalingRun) -> u64,
    varied: impl Fn(&ScalingRun) -> u64,
) -> Result<Option<f64>> {
    use std::collections::{BTreeMap, BTreeSet};
    let mut groups: BTreeMap<u64, Vec<&ScalingRun>> = BTreeMap::new();
    for r in runs {
        groups.entry(fixed(r)).or_default().push(r);
    }
    let mut best: Option<(usize, &Vec<&ScalingRun>)> = None;
    for g in groups.values() {
        let distinct = g.iter().map(|r| varied(r)).collect::<BTreeSet<_>>().len();
        if distinct >= 3 && best.is_none_or(|(n, _)| distinct > n) {
            best = Some((distinct, g));
        }
    }
    let Some((_, group)) = best else {
        return Ok(None);
    };
    let xs: Vec<f64> = group.iter().map(|r| varied(r) as f64).collect();
    let ys: Vec<f64> = group.iter().map(|r| r.g_error).collect();
    log_log_slope(&xs, &ys).map(Some)
}
