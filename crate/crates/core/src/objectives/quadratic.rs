use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::moo_core::linalg::{dot, norm};
use crate::moo_core::{GradientMatrix, JointModel, Layout, PopulationQuery, StochasticTask};
use crate::rng::{keyed_rng, SampleKey, Stream};

/// `l(Ω) = ½ (Ω − c)ᵀ A (Ω − c)` for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticAgent {
    pub a: DMatrix<f64>,
    pub center: Vec<f64>,
}

impl QuadraticAgent {
    pub fn new(a: DMatrix<f64>, center: Vec<f64>) -> Self {
        Self { a, center }
    }

    /// `A = scale·I`.
    pub fn isotropic(scale: f64, center: Vec<f64>) -> Self {
        let p = center.len();
        Self {
            a: DMatrix::identity(p, p) * scale,
            center,
        }
    }

    pub fn diagonal(diag: &[f64], center: Vec<f64>) -> Self {
        Self {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
            center,
        }
    }

    fn gradient_at(&self, omega: &[f64], center: &[f64]) -> Vec<f64> {
        let diff = DVector::from_iterator(omega.len(), omega.iter().zip(center).map(|(w, c)| w - c));
        (&self.a * diff).iter().copied().collect()
    }

    fn loss_at(&self, omega: &[f64], center: &[f64]) -> f64 {
        let diff: Vec<f64> = omega.iter().zip(center).map(|(w, c)| w - c).collect();
        0.5 * dot(&diff, &self.gradient_at(omega, center))
    }

    fn spectral_norm(&self) -> f64 {
        SymmetricEigen::new(self.a.clone())
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
    }
}

/// Per-agent convex quadratics on a ball of radius `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTask {
    pub agents: Vec<QuadraticAgent>,
    pub radius: f64,
}

impl QuadraticTask {
    pub fn new(agents: Vec<QuadraticAgent>, radius: f64) -> Result<Self> {
        let task = Self { agents, radius };
        task.validate()?;
        Ok(task)
    }

    pub fn dim(&self) -> usize {
        self.agents.first().map_or(0, |a| a.center.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::config("quadratic task has no agents"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::invalid(format!("radius must be positive, got {}", self.radius)));
        }
        let p = self.dim();
        for (i, ag) in self.agents.iter().enumerate() {
            if ag.center.len() != p || ag.a.nrows() != p || ag.a.ncols() != p {
                return Err(Error::invalid(format!("agent {i} has inconsistent dimensions")));
            }
            if (&ag.a - ag.a.transpose()).amax() > 1e-12 {
                return Err(Error::invalid(format!("A for agent {i} is not symmetric")));
            }
            let min_eig = SymmetricEigen::new(ag.a.clone()).eigenvalues.min();
            if min_eig < -1e-12 {
                return Err(Error::invalid(format!(
                    "A for agent {i} is not positive semidefinite (eigenvalue {min_eig})"
                )));
            }
        }
        Ok(())
    }

    /// Projects `omega` onto the ball of radius `R`.
    pub fn confine(&self, omega: &mut [f64]) {
        let n = norm(omega);
        if n > self.radius {
            let s = self.radius / n;
            omega.iter_mut().for_each(|w| *w *= s);
        }
    }
}

/// Exact gradients `A^i(Ω − c^i)`; `Ω` is first projected onto the ball.
pub fn quadratic_gradients(task: &QuadraticTask, omega: &JointModel) -> Result<GradientMatrix> {
    if omega.dim() != task.dim() {
        return Err(Error::invalid(format!(
            "model dimension {} does not match task dimension {}",
            omega.dim(),
            task.dim()
        )));
    }
    let mut x = omega.params().to_vec();
    task.confine(&mut x);
    GradientMatrix::from_columns(
        task.agents
            .iter()
            .map(|ag| ag.gradient_at(&x, &ag.center))
            .collect(),
    )
}

/// `(ℓ_f, ℓ'_f)` valid on the radius-`R` ball.
///
/// `ℓ'_f` is the largest eigenvalue of any `A^i`; `ℓ_f` bounds the gradient
/// norm by `‖A^i‖₂ (R + ‖c^i‖)`, attained when `c^i` lies along the top
/// eigenvector.
pub fn lipschitz_constants(task: &QuadraticTask) -> (f64, f64) {
    task.agents.iter().fold((0.0f64, 0.0f64), |(lf, lfp), ag| {
        let s = ag.spectral_norm();
        (lf.max(s * (task.radius + norm(&ag.center))), lfp.max(s))
    })
}

/// Stochastic oracle over a [`QuadraticTask`]: each agent owns a pool of
/// `D` noisy centers drawn around its population center. A sample is one
/// pool center; the training loss averages the pool.
#[derive(Debug, Clone)]
pub struct QuadraticOracle {
    population: QuadraticTask,
    pools: Vec<Vec<Vec<f64>>>,
    empirical_centers: Vec<Vec<f64>>,
    /// Per agent `½·mean_j (c_j − c̄)ᵀA(c_j − c̄)`, the loss left at `Ω = c̄`.
    pool_spread: Vec<f64>,
    layout: Arc<Layout>,
}

impl QuadraticOracle {
    /// Draws `samples` centers per agent as `c^i + noise_std·ξ`, keyed by `seed`.
    pub fn new(task: QuadraticTask, samples: usize, noise_std: f64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::config("quadratic oracle needs at least one sample per agent"));
        }
        let pools = task
            .agents
            .iter()
            .enumerate()
            .map(|(i, ag)| {
                let mut rng = keyed_rng(seed, Stream::Dataset, &[i as u64]);
                (0..samples)
                    .map(|_| {
                        ag.center
                            .iter()
                            .map(|c| {
                                let z: f64 = StandardNormal.sample(&mut rng);
                                c + noise_std * z
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::from_pools(task, pools)
    }

    /// All agents share one objective and one sample pool.
    pub fn identical(
        agents: usize,
        agent: QuadraticAgent,
        radius: f64,
        samples: usize,
        noise_std: f64,
        seed: u64,
    ) -> Result<Self> {
        let single = Self::new(QuadraticTask::new(vec![agent.clone()], radius)?, samples, noise_std, seed)?;
        let pool = single.pools[0].clone();
        Self::from_pools(
            QuadraticTask::new(vec![agent; agents], radius)?,
            vec![pool; agents],
        )
    }

    pub fn from_pools(task: QuadraticTask, pools: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        task.validate()?;
        if pools.len() != task.agents.len() {
            return Err(Error::config("one sample pool per agent is required"));
        }
        let p = task.dim();
        let empirical_centers = pools
            .iter()
            .enumerate()
            .map(|(i, pool)| {
                if pool.is_empty() {
                    return Err(Error::config(format!("agent {i} has an empty sample pool")));
                }
                if pool.iter().any(|c| c.len() != p) {
                    return Err(Error::invalid(format!("agent {i} pool has wrong dimension")));
                }
                let mut mean = vec![0.0; p];
                for c in pool {
                    mean.iter_mut().zip(c).for_each(|(m, x)| *m += x);
                }
                mean.iter_mut().for_each(|m| *m /= pool.len() as f64);
                Ok(mean)
            })
            .collect::<Result<Vec<_>>>()?;
        let pool_spread = task
            .agents
            .iter()
            .zip(&pools)
            .zip(&empirical_centers)
            .map(|((ag, pool), mean)| {
                pool.iter().map(|c| ag.loss_at(c, mean)).sum::<f64>() / pool.len() as f64
            })
            .collect();
        Ok(Self {
            layout: Arc::new(Layout::shared(p)),
            population: task,
            pools,
            empirical_centers,
            pool_spread,
        })
    }

    /// Three conflicting agents in the plane.
    ///
    /// Anisotropic curvatures; near the origin the min-norm weights are
    /// roughly `(0.23, 0.08, 0.70)`, far from uniform. Gradients are of order
    /// one, so the default step constants are stable.
    pub fn conflicting(samples: usize, noise_std: f64, seed: u64) -> Result<Self> {
        let task = QuadraticTask::new(
            vec![
                QuadraticAgent::diagonal(&[2.0, 0.5], vec![0.6, 0.2]),
                QuadraticAgent::diagonal(&[0.5, 2.0], vec![0.2, -0.6]),
                QuadraticAgent::diagonal(&[1.0, 1.0], vec![-0.4, 0.1]),
            ],
            10.0,
        )?;
        Self::new(task, samples, noise_std, seed)
    }

    pub fn population_task(&self) -> &QuadraticTask {
        &self.population
    }

    /// The task whose centers are the pool means (the training objective).
    pub fn empirical_task(&self) -> QuadraticTask {
        QuadraticTask {
            agents: self
                .population
                .agents
                .iter()
                .zip(&self.empirical_centers)
                .map(|(ag, c)| QuadraticAgent::new(ag.a.clone(), c.clone()))
                .collect(),
            radius: self.population.radius,
        }
    }

    pub fn samples_per_agent(&self) -> usize {
        self.pools.first().map_or(0, Vec::len)
    }

    /// Lipschitz constants valid for every individual sample on the ball.
    pub fn lipschitz_constants(&self) -> (f64, f64) {
        self.population
            .agents
            .iter()
            .zip(&self.pools)
            .fold((0.0f64, 0.0f64), |(lf, lfp), (ag, pool)| {
                let s = ag.spectral_norm();
                let far = pool.iter().map(|c| norm(c)).fold(0.0, f64::max);
                (lf.max(s * (self.population.radius + far)), lfp.max(s))
            })
    }
}

impl StochasticTask for QuadraticOracle {
    fn num_agents(&self) -> usize {
        self.population.agents.len()
    }

    fn layout(&self) -> Arc<Layout> {
        Arc::clone(&self.layout)
    }

    fn sample_gradient(&self, agent: usize, model: &JointModel, key: SampleKey) -> Result<Vec<f64>> {
        let pool = &self.pools[agent];
        let idx = key.rng().random_range(0..pool.len());
        Ok(self.population.agents[agent].gradient_at(model.params(), &pool[idx]))
    }

    fn full_gradients(&self, model: &JointModel) -> Result<GradientMatrix> {
        GradientMatrix::from_columns(
            self.population
                .agents
                .iter()
                .zip(&self.empirical_centers)
                .map(|(ag, c)| ag.gradient_at(model.params(), c))
                .collect(),
        )
    }

    fn losses(&self, model: &JointModel) -> Result<Vec<f64>> {
        Ok(self
            .population
            .agents
            .iter()
            .zip(&self.empirical_centers)
            .zip(&self.pool_spread)
            .map(|((ag, mean), spread)| ag.loss_at(model.params(), mean) + spread)
            .collect())
    }

    fn population_gradients(
        &self,
        model: &JointModel,
        _query: PopulationQuery,
    ) -> Result<Option<GradientMatrix>> {
        let cols = self
            .population
            .agents
            .iter()
            .map(|ag| ag.gradient_at(model.params(), &ag.center))
            .collect();
        GradientMatrix::from_columns(cols).map(Some)
    }

    fn confine(&self, model: &mut JointModel) {
        self.population.confine(model.params_mut());
    }
}
