use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::moo_core::linalg::dot;
use crate::moo_core::{GradientMatrix, JointModel, Layout, PopulationQuery, StochasticTask};
use crate::rng::{keyed_rng, SampleKey, Stream};

use super::data::DistributionDescriptor;
use super::population::{monte_carlo_mean, PopulationEstimate};

/// Shared linear regressor `Ω` fit by every agent to its own
/// `y = θ^iᵀx + σε`, `x ~ N(0, I)`, with per-sample squared error.
///
/// The population gradient is `2(Ω − θ^i)` in closed form.
#[derive(Debug, Clone)]
pub struct LinearGaussianTask {
    thetas: Vec<Vec<f64>>,
    noise_std: f64,
    inputs: Vec<Vec<Vec<f64>>>,
    targets: Vec<Vec<f64>>,
    /// Per agent `(XᵀX/D, Xᵀy/D, mean y²)`.
    moments: Vec<(Vec<Vec<f64>>, Vec<f64>, f64)>,
    layout: Arc<Layout>,
}

impl LinearGaussianTask {
    pub fn new(thetas: Vec<Vec<f64>>, noise_std: f64, samples: usize, seed: u64) -> Result<Self> {
        let p = thetas.first().map(Vec::len).unwrap_or(0);
        if thetas.is_empty() || p == 0 || thetas.iter().any(|t| t.len() != p) {
            return Err(Error::config("linear-Gaussian task needs equal-length, non-empty θ"));
        }
        if samples == 0 {
            return Err(Error::config("linear-Gaussian task needs at least one sample"));
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        let mut moments = Vec::new();
        for (i, theta) in thetas.iter().enumerate() {
            let mut rng = keyed_rng(seed, Stream::Dataset, &[i as u64]);
            let (xs, ys): (Vec<Vec<f64>>, Vec<f64>) = (0..samples)
                .map(|_| draw(theta, noise_std, &mut rng))
                .unzip();
            let n = samples as f64;
            let mut xx = vec![vec![0.0; p]; p];
            let mut xy = vec![0.0; p];
            let mut yy = 0.0;
            for (x, &y) in xs.iter().zip(&ys) {
                for a in 0..p {
                    xy[a] += x[a] * y / n;
                    for b in 0..p {
                        xx[a][b] += x[a] * x[b] / n;
                    }
                }
                yy += y * y / n;
            }
            inputs.push(xs);
            targets.push(ys);
            moments.push((xx, xy, yy));
        }
        Ok(Self {
            thetas,
            noise_std,
            inputs,
            targets,
            moments,
            layout: Arc::new(Layout::shared(p)),
        })
    }

    pub fn samples_per_agent(&self) -> usize {
        self.targets[0].len()
    }

    pub fn descriptor(&self, agent: usize) -> DistributionDescriptor {
        DistributionDescriptor::LinearGaussian {
            theta: self.thetas[agent].clone(),
            noise_std: self.noise_std,
        }
    }

    /// Closed form `2(Ω − θ^i)`.
    pub fn population_gradient(&self, agent: usize, omega: &[f64]) -> Vec<f64> {
        omega
            .iter()
            .zip(&self.thetas[agent])
            .map(|(w, t)| 2.0 * (w - t))
            .collect()
    }

    /// Monte-Carlo estimate from `n` fresh samples on a dedicated stream.
    pub fn population_gradient_mc(
        &self,
        agent: usize,
        omega: &[f64],
        n: usize,
        seed: u64,
    ) -> Result<PopulationEstimate> {
        let mut rng = keyed_rng(seed, Stream::Population, &[agent as u64]);
        let theta = &self.thetas[agent];
        monte_carlo_mean(n, |_| {
            let (x, y) = draw(theta, self.noise_std, &mut rng);
            Ok(sample_gradient(omega, &x, y))
        })
    }
}

fn draw<R: Rng + ?Sized>(theta: &[f64], noise_std: f64, rng: &mut R) -> (Vec<f64>, f64) {
    let x: Vec<f64> = theta.iter().map(|_| StandardNormal.sample(rng)).collect();
    let eps: f64 = StandardNormal.sample(rng);
    let y = dot(theta, &x) + noise_std * eps;
    (x, y)
}

fn sample_gradient(omega: &[f64], x: &[f64], y: f64) -> Vec<f64> {
    let r = dot(omega, x) - y;
    x.iter().map(|xi| 2.0 * r * xi).collect()
}

impl StochasticTask for LinearGaussianTask {
    fn num_agents(&self) -> usize {
        self.thetas.len()
    }

    fn layout(&self) -> Arc<Layout> {
        Arc::clone(&self.layout)
    }

    fn sample_gradient(&self, agent: usize, model: &JointModel, key: SampleKey) -> Result<Vec<f64>> {
        let idx = key.rng().random_range(0..self.targets[agent].len());
        Ok(sample_gradient(
            model.params(),
            &self.inputs[agent][idx],
            self.targets[agent][idx],
        ))
    }

    fn full_gradients(&self, model: &JointModel) -> Result<GradientMatrix> {
        let w = model.params();
        GradientMatrix::from_columns(
            self.moments
                .iter()
                .map(|(xx, xy, _)| {
                    xx.iter()
                        .zip(xy)
                        .map(|(row, b)| 2.0 * (dot(row, w) - b))
                        .collect()
                })
                .collect(),
        )
    }

    fn losses(&self, model: &JointModel) -> Result<Vec<f64>> {
        let w = model.params();
        Ok(self
            .moments
            .iter()
            .map(|(xx, xy, yy)| {
                let quad: f64 = xx.iter().zip(w).map(|(row, wi)| wi * dot(row, w)).sum();
                quad - 2.0 * dot(xy, w) + yy
            })
            .collect())
    }

    fn population_gradients(
        &self,
        model: &JointModel,
        _query: PopulationQuery,
    ) -> Result<Option<GradientMatrix>> {
        GradientMatrix::from_columns(
            (0..self.num_agents())
                .map(|i| self.population_gradient(i, model.params()))
                .collect(),
        )
        .map(Some)
    }
}
