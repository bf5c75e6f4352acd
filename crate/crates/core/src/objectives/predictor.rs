use std::sync::Arc;

use crate::error::{Error, Result};
use crate::moo_core::{JointModel, Layout, Segment, SegmentRole};

use super::data::SampleBatch;
use super::loss::{loss_and_gradient, LossKind};

/// Shared linear backbone (window → features) with one linear head per agent.
///
/// Parameter layout: backbone weights `W` (features × window, row-major),
/// backbone bias `b`, then per agent a head `(v, c)` of `features + 1`
/// values. Prediction for agent `i` is `vᵢᵀ(W x + b) + cᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    window: usize,
    features: usize,
    layout: Arc<Layout>,
}

impl PredictorModel {
    pub const DEFAULT_WINDOW: usize = 8;
    pub const DEFAULT_FEATURES: usize = 4;

    pub fn new(window: usize, features: usize, heads: &[&str]) -> Result<Self> {
        if window == 0 || features == 0 || heads.is_empty() {
            return Err(Error::invalid("predictor needs a window, features and at least one head"));
        }
        let backbone = features * window + features;
        let mut segments = vec![Segment {
            name: "backbone".into(),
            role: SegmentRole::Shared,
            start: 0,
            len: backbone,
        }];
        for (i, name) in heads.iter().enumerate() {
            segments.push(Segment {
                name: format!("head_{name}"),
                role: SegmentRole::Agent(i),
                start: backbone + i * (features + 1),
                len: features + 1,
            });
        }
        Ok(Self {
            window,
            features,
            layout: Arc::new(Layout::new(segments)?),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn num_heads(&self) -> usize {
        self.layout.segments().len() - 1
    }

    pub fn layout(&self) -> Arc<Layout> {
        Arc::clone(&self.layout)
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn head_start(&self, agent: usize) -> usize {
        self.features * (self.window + 1) + agent * (self.features + 1)
    }

    fn check(&self, omega: &JointModel, agent: usize, input: &[f64]) -> Result<()> {
        if omega.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "model has {} parameters, predictor expects {}",
                omega.dim(),
                self.dim()
            )));
        }
        if agent >= self.num_heads() {
            return Err(Error::invalid(format!("no head for agent {agent}")));
        }
        if input.len() != self.window {
            return Err(Error::invalid(format!(
                "window length {} does not match predictor window {}",
                input.len(),
                self.window
            )));
        }
        Ok(())
    }

    fn features_of(&self, p: &[f64], input: &[f64]) -> Vec<f64> {
        let bias = self.features * self.window;
        (0..self.features)
            .map(|f| {
                let row = &p[f * self.window..(f + 1) * self.window];
                row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + p[bias + f]
            })
            .collect()
    }

    pub fn predict(&self, omega: &JointModel, agent: usize, input: &[f64]) -> Result<f64> {
        self.check(omega, agent, input)?;
        let p = omega.params();
        let z = self.features_of(p, input);
        let h = self.head_start(agent);
        Ok(z.iter().zip(&p[h..h + self.features]).map(|(z, v)| z * v).sum::<f64>()
            + p[h + self.features])
    }

    /// Mean loss of agent `batch.agent` over the batch.
    pub fn agent_loss(&self, omega: &JointModel, batch: &SampleBatch, kind: LossKind) -> Result<f64> {
        let mut total = 0.0;
        for (x, &y) in batch.inputs.iter().zip(&batch.targets) {
            total += loss_and_gradient(kind, self.predict(omega, batch.agent, x)?, y)?.0;
        }
        Ok(total / batch.len() as f64)
    }

    /// Mean per-sample gradient of agent `batch.agent`'s loss over all of `Ω`.
    /// Other agents' head slices stay exactly zero.
    pub fn agent_loss_gradient(
        &self,
        omega: &JointModel,
        batch: &SampleBatch,
        kind: LossKind,
    ) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.dim()];
        for (x, &y) in batch.inputs.iter().zip(&batch.targets) {
            self.accumulate(omega, batch.agent, x, y, kind, 1.0, &mut grad)?;
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        Ok(grad)
    }

    /// Adds `weight · ∂loss/∂Ω` for one sample into `grad`.
    pub(crate) fn accumulate(
        &self,
        omega: &JointModel,
        agent: usize,
        input: &[f64],
        target: f64,
        kind: LossKind,
        weight: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        self.check(omega, agent, input)?;
        let p = omega.params();
        let z = self.features_of(p, input);
        let h = self.head_start(agent);
        let head = &p[h..h + self.features];
        let pred = z.iter().zip(head).map(|(z, v)| z * v).sum::<f64>() + p[h + self.features];
        let (_, dl) = loss_and_gradient(kind, pred, target)?;
        let s = weight * dl;
        let bias = self.features * self.window;
        for f in 0..self.features {
            let sv = s * head[f];
            for (g, x) in grad[f * self.window..(f + 1) * self.window].iter_mut().zip(input) {
                *g += sv * x;
            }
            grad[bias + f] += sv;
            grad[h + f] += s * z[f];
        }
        grad[h + self.features] += s;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moo_core::JointModel;
    use crate::objectives::finite_difference_check;
    use rand::{Rng, SeedableRng};

    fn predictor() -> PredictorModel {
        PredictorModel::new(8, 4, &["a", "p", "n"]).unwrap()
    }

    #[test]
    fn layout_covers_parameters() {
        let m = predictor();
        assert_eq!(m.dim(), 4 * 8 + 4 + 3 * 5);
        assert_eq!(m.layout().agent_range(2), Some(46..51));
    }

    #[test]
    fn zero_model_zero_targets_zero_gradient() {
        let m = predictor();
        let omega = JointModel::zeros(m.layout());
        let batch = SampleBatch::new(vec![vec![0.3; 8], vec![1.0; 8]], vec![0.0, 0.0], 2, 1).unwrap();
        let g = m.agent_loss_gradient(&omega, &batch, LossKind::LogCosh).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn other_heads_untouched() {
        let m = predictor();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let params: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let omega = JointModel::new(params, m.layout()).unwrap();
        let batch = SampleBatch::new(vec![vec![0.5; 8]], vec![3.0], 1, 1).unwrap();
        let g = m.agent_loss_gradient(&omega, &batch, LossKind::Mse).unwrap();
        for other in [0, 2] {
            let r = m.layout().agent_range(other).unwrap();
            assert!(g[r].iter().all(|&x| x == 0.0));
        }
        let own = m.layout().agent_range(1).unwrap();
        assert!(g[own].iter().any(|&x| x != 0.0));
    }

    #[test]
    fn window_mismatch_rejected() {
        let m = predictor();
        let omega = JointModel::zeros(m.layout());
        let batch = SampleBatch::new(vec![vec![0.5; 7]], vec![3.0], 0, 1).unwrap();
        assert!(m.agent_loss_gradient(&omega, &batch, LossKind::Mse).is_err());
    }

    #[test]
    fn matches_finite_differences() {
        let m = predictor();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for kind in [LossKind::L1, LossKind::Mse, LossKind::LogCosh] {
            for _ in 0..20 {
                let params: Vec<f64> = (0..m.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let omega = JointModel::new(params.clone(), m.layout()).unwrap();
                let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
                let agent = rng.random_range(0..3);
                let y = rng.random_range(-2.0..2.0);
                let batch = SampleBatch::new(vec![x], vec![y], agent, 1).unwrap();
                let pred = m.predict(&omega, agent, &batch.inputs[0]).unwrap();
                if (pred - y).abs() < 1e-3 {
                    continue;
                }
                let g = m.agent_loss_gradient(&omega, &batch, kind).unwrap();
                let layout = m.layout();
                let err = finite_difference_check(
                    |p| m.agent_loss(&JointModel::new(p.to_vec(), layout.clone())?, &batch, kind),
                    &g,
                    &params,
                    1e-6,
                )
                .unwrap();
                assert!(err <= 1e-5, "{kind:?}: {err}");
            }
        }
    }
}
