use crate::error::{Error, Result};
use crate::moo_core::JointModel;
use crate::rng::{keyed_rng, Stream};

use super::data::DatasetSplit;
use super::loss::LossKind;
use super::predictor::PredictorModel;

/// Fresh samples per Monte-Carlo population-gradient evaluation.
pub const MC_SAMPLES: usize = 100_000;

/// Estimated population gradient with per-coordinate standard errors.
/// Closed-form gradients report zero standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationEstimate {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub samples: usize,
}

impl PopulationEstimate {
    pub fn exact(mean: Vec<f64>) -> Self {
        let p = mean.len();
        Self {
            mean,
            std_error: vec![0.0; p],
            samples: 0,
        }
    }
}

/// Sample mean and standard error of `draw(k)` for `k in 0..n` (Welford).
pub fn monte_carlo_mean<F>(n: usize, mut draw: F) -> Result<PopulationEstimate>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    if n < 2 {
        return Err(Error::config("Monte-Carlo estimation needs at least 2 samples"));
    }
    let first = draw(0)?;
    let p = first.len();
    let mut mean = first;
    let mut m2 = vec![0.0; p];
    for k in 1..n {
        let x = draw(k)?;
        if x.len() != p {
            return Err(Error::invalid("Monte-Carlo draws differ in dimension"));
        }
        let count = (k + 1) as f64;
        for j in 0..p {
            let delta = x[j] - mean[j];
            mean[j] += delta / count;
            m2[j] += delta * (x[j] - mean[j]);
        }
    }
    let nf = n as f64;
    let std_error = m2.iter().map(|s| (s / (nf - 1.0) / nf).sqrt()).collect();
    Ok(PopulationEstimate { mean, std_error, samples: n })
}

/// Population gradient of one predictor head.
///
/// With a time-series descriptor, `budget` fresh windows are drawn from a
/// stream keyed by `stream_key`; without one, the holdout pool stands in for
/// the population.
pub fn predictor_population_gradient(
    model: &PredictorModel,
    omega: &JointModel,
    split: &DatasetSplit,
    kind: LossKind,
    agent: usize,
    budget: usize,
    stream_key: &[u64],
) -> Result<PopulationEstimate> {
    let mut grad = vec![0.0; model.dim()];
    if split.descriptor.is_none() {
        if budget == 0 || split.holdout.is_empty() {
            return Err(Error::config(
                "no distribution descriptor and no holdout sampling budget",
            ));
        }
        return monte_carlo_mean(split.holdout.len(), |k| {
            let w = &split.holdout[k];
            grad.iter_mut().for_each(|g| *g = 0.0);
            model.accumulate(omega, agent, &w.input, w.target, kind, 1.0, &mut grad)?;
            Ok(grad.clone())
        });
    }
    if budget == 0 {
        return Err(Error::config("Monte-Carlo budget must be positive"));
    }
    let mut rng = keyed_rng(stream_key.first().copied().unwrap_or(0), Stream::Population, stream_key);
    monte_carlo_mean(budget, |_| {
        let (x, y) = split.descriptor.sample_window(model.window(), &mut rng)?;
        grad.iter_mut().for_each(|g| *g = 0.0);
        model.accumulate(omega, agent, &x, y, kind, 1.0, &mut grad)?;
        Ok(grad.clone())
    })
}
