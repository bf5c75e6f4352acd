use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::metrics::{conflict_error, generalization_error};
use super::min_norm::min_norm_weights;
use super::schedule::StepSchedule;
use super::simplex::project_to_simplex;
use super::types::{GradientMatrix, JointModel, Layout, WeightVector};
use super::INIT_STD;
use crate::error::{Error, Result};
use crate::rng::SampleKey;

/// How the weight update reads the inner products of the two sampled
/// gradient sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightUpdate {
    /// `γ ← Π(γ − η J(d₁)ᵀ J(d₂) γ)`.
    #[default]
    Matrix,
    /// Coordinatewise `γ^i ← γ^i − η ⟨g^i(d₁), g^i(d₂)⟩`, then projected.
    LiteralDiagonal,
}

impl std::str::FromStr for WeightUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Self::Matrix),
            "literal-diagonal" => Ok(Self::LiteralDiagonal),
            other => Err(Error::config(format!("unknown weight update variant `{other}`"))),
        }
    }
}

/// Dynamic weighting or a fixed weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dynamic(WeightUpdate),
    Static,
}

/// A multi-agent objective that can be sampled stochastically.
///
/// Implementations must be pure: the same `(model, key)` always gives the
/// same gradient.
pub trait StochasticTask: Sync {
    fn num_agents(&self) -> usize;

    fn layout(&self) -> Arc<Layout>;

    /// Configuration checks run before an optimisation starts.
    fn validate(&self) -> Result<()> {
        Ok(())
    }

    /// Default `Ω₀`: seeded Gaussian with standard deviation [`INIT_STD`].
    fn initial_model(&self, seed: u64) -> JointModel {
        let mut m = JointModel::seeded_gaussian(self.layout(), seed, INIT_STD);
        self.confine(&mut m);
        m
    }

    /// Gradient of agent `agent`'s loss at one sample drawn with `key`.
    fn sample_gradient(&self, agent: usize, model: &JointModel, key: SampleKey) -> Result<Vec<f64>>;

    /// Full-batch (training set) gradients, one column per agent.
    fn full_gradients(&self, model: &JointModel) -> Result<GradientMatrix>;

    /// Full-batch training losses.
    fn losses(&self, model: &JointModel) -> Result<Vec<f64>>;

    /// Population gradients, when the data distribution is known.
    fn population_gradients(
        &self,
        _model: &JointModel,
        _query: PopulationQuery,
    ) -> Result<Option<GradientMatrix>> {
        Ok(None)
    }

    /// Keeps iterates inside the task's domain.
    fn confine(&self, _model: &mut JointModel) {}
}

/// Identifies one population-gradient evaluation (seeds Monte-Carlo draws).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PopulationQuery {
    pub seed: u64,
    pub iteration: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: StepSchedule,
    pub iterations: u64,
    pub seed: u64,
    pub variant: WeightUpdate,
    /// Defaults to uniform weights.
    pub initial_weights: Option<WeightVector>,
    /// Defaults to [`StochasticTask::initial_model`].
    pub initial_model: Option<JointModel>,
    /// Evaluate the G-error every this many iterations (and at the last
    /// one); `0` disables it.
    pub g_error_every: u64,
}

impl RunConfig {
    pub fn new(schedule: StepSchedule, iterations: u64, seed: u64) -> Self {
        Self {
            schedule,
            iterations,
            seed,
            variant: WeightUpdate::Matrix,
            initial_weights: None,
            initial_model: None,
            g_error_every: 1,
        }
    }

    pub fn with_variant(mut self, variant: WeightUpdate) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_initial_weights(mut self, w: WeightVector) -> Self {
        self.initial_weights = Some(w);
        self
    }

    pub fn with_initial_model(mut self, m: JointModel) -> Self {
        self.initial_model = Some(m);
        self
    }

    pub fn with_g_error_every(mut self, every: u64) -> Self {
        self.g_error_every = every;
        self
    }
}

/// One iterate `(γ_t, Ω_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub t: u64,
    pub gamma: WeightVector,
    pub model: JointModel,
    pub rng_seed: u64,
    pub mode: Mode,
}

/// Metrics measured at iterate `t`, before the update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: u64,
    pub gamma: Vec<f64>,
    pub losses: Vec<f64>,
    pub c_error: f64,
    /// `None` when the G-error was not evaluated at this iteration.
    pub g_error: Option<f64>,
    pub pareto_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// States `0..=T`.
    pub trajectory: Vec<OptimizerState>,
    /// Records `0..T`.
    pub records: Vec<IterationRecord>,
}

impl RunOutput {
    pub fn final_state(&self) -> &OptimizerState {
        self.trajectory.last().expect("trajectory holds the initial state")
    }

    /// Running mean of the C-error: entry `t` averages records `0..=t`.
    pub fn c_error_time_avg(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                acc += r.c_error;
                acc / (i + 1) as f64
            })
            .collect()
    }

    /// Mean C-error over the whole run.
    pub fn mean_c_error(&self) -> f64 {
        self.c_error_time_avg().last().copied().unwrap_or(0.0)
    }
}

/// Writes records as line-delimited JSON.
pub fn write_jsonl<W: Write>(records: &[IterationRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::json("metrics record", e))?;
        writeln!(out, "{line}").map_err(|e| Error::io("metrics stream", e))?;
    }
    Ok(())
}

/// One dynamic-weighting update of `γ` from two independently sampled
/// gradient sets. `eta = 0` leaves `γ` unchanged.
pub fn dynamic_weight_step(
    gamma: &WeightVector,
    j1: &GradientMatrix,
    j2: &GradientMatrix,
    eta: f64,
    variant: WeightUpdate,
) -> Result<WeightVector> {
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::invalid(format!("eta must be non-negative, got {eta}")));
    }
    j1.check_same_shape(j2)?;
    if gamma.len() != j1.num_agents() {
        return Err(Error::invalid(format!(
            "{} weights for {} agents",
            gamma.len(),
            j1.num_agents()
        )));
    }
    if eta == 0.0 {
        return Ok(gamma.clone());
    }
    let g = gamma.as_slice();
    let raw: Vec<f64> = match variant {
        WeightUpdate::Matrix => {
            let d2 = j2.combine(g)?;
            j1.columns()
                .iter()
                .zip(g)
                .map(|(c, &gi)| gi - eta * super::linalg::dot(c, &d2))
                .collect()
        }
        WeightUpdate::LiteralDiagonal => j1
            .columns()
            .iter()
            .zip(j2.columns())
            .zip(g)
            .map(|((a, b), &gi)| gi - eta * super::linalg::dot(a, b))
            .collect(),
    };
    project_to_simplex(&raw)
}

/// Model update `Ω − β·J(d₃)γ`.
pub fn model_step(
    model: &JointModel,
    j3: &GradientMatrix,
    gamma_next: &WeightVector,
    beta: f64,
) -> Result<JointModel> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::invalid(format!("beta must be non-negative, got {beta}")));
    }
    if j3.dim() != model.dim() {
        return Err(Error::invalid(format!(
            "gradient dimension {} does not match model dimension {}",
            j3.dim(),
            model.dim()
        )));
    }
    let direction = j3.combine(gamma_next.as_slice())?;
    let params = model
        .params()
        .iter()
        .zip(&direction)
        .map(|(w, d)| w - beta * d)
        .collect();
    Ok(model.with_params(params))
}

/// Runs the dynamic-weighting conflict-resolving optimizer for `T` iterations.
///
/// Each iteration draws three independent samples per agent: slots 1 and 2
/// feed the weight update, slot 3 the model update. Metrics are taken at
/// `(Ω_t, γ_t)` with full-batch gradients, `γ*` from [`min_norm_weights`].
pub fn run_conflict_resolving<T: StochasticTask + ?Sized>(
    task: &T,
    cfg: &RunConfig,
) -> Result<RunOutput> {
    run(task, cfg, Mode::Dynamic(cfg.variant))
}

/// Same loop with `γ_t = gamma_fixed` throughout.
pub fn run_static_baseline<T: StochasticTask + ?Sized>(
    task: &T,
    gamma_fixed: &WeightVector,
    cfg: &RunConfig,
) -> Result<RunOutput> {
    let cfg = cfg.clone().with_initial_weights(gamma_fixed.clone());
    run(task, &cfg, Mode::Static)
}

fn run<T: StochasticTask + ?Sized>(task: &T, cfg: &RunConfig, mode: Mode) -> Result<RunOutput> {
    let k = task.num_agents();
    if k == 0 {
        return Err(Error::config("task has no agents"));
    }
    if cfg.iterations == 0 {
        return Err(Error::config("iteration count must be at least 1"));
    }
    cfg.schedule.validate()?;
    task.validate()?;

    let mut gamma = match &cfg.initial_weights {
        Some(w) if w.len() != k => {
            return Err(Error::config(format!("{} initial weights for {k} agents", w.len())))
        }
        Some(w) => w.clone(),
        None => WeightVector::uniform(k),
    };
    let mut model = match &cfg.initial_model {
        Some(m) if m.dim() != task.layout().dim() => {
            return Err(Error::config("initial model does not match the task layout"))
        }
        Some(m) => m.clone(),
        None => task.initial_model(cfg.seed),
    };

    let mut trajectory = Vec::with_capacity(cfg.iterations as usize + 1);
    let mut records = Vec::with_capacity(cfg.iterations as usize);
    let state = |t, gamma: &WeightVector, model: &JointModel| OptimizerState {
        t,
        gamma: gamma.clone(),
        model: model.clone(),
        rng_seed: cfg.seed,
        mode,
    };

    for t in 0..cfg.iterations {
        trajectory.push(state(t, &gamma, &model));
        let with_g = cfg.g_error_every > 0
            && (t % cfg.g_error_every == 0 || t + 1 == cfg.iterations);
        records.push(measure(task, &model, &gamma, t, cfg.seed, with_g)?);

        let sample = |slot: u8| -> Result<GradientMatrix> {
            let cols = (0..k)
                .map(|agent| {
                    let key = SampleKey { seed: cfg.seed, agent, iteration: t, slot };
                    task.sample_gradient(agent, &model, key)
                })
                .collect::<Result<Vec<_>>>()?;
            GradientMatrix::from_columns(cols)
        };

        if let Mode::Dynamic(variant) = mode {
            let j1 = sample(1)?;
            let j2 = sample(2)?;
            gamma = dynamic_weight_step(&gamma, &j1, &j2, cfg.schedule.eta(t), variant)?;
        }
        let j3 = sample(3)?;
        model = model_step(&model, &j3, &gamma, cfg.schedule.beta(t))?;
        task.confine(&mut model);
    }
    trajectory.push(state(cfg.iterations, &gamma, &model));
    Ok(RunOutput { trajectory, records })
}

fn measure<T: StochasticTask + ?Sized>(
    task: &T,
    model: &JointModel,
    gamma: &WeightVector,
    t: u64,
    seed: u64,
    with_g: bool,
) -> Result<IterationRecord> {
    let full = task.full_gradients(model)?;
    let star = min_norm_weights(&full)?;
    let c_error = conflict_error(&full, gamma, &star.weights)?;
    let g_error = if with_g {
        match task.population_gradients(model, PopulationQuery { seed, iteration: t })? {
            Some(pop) => Some(generalization_error(&full, &pop, gamma)?),
            None => None,
        }
    } else {
        None
    };
    Ok(IterationRecord {
        t,
        gamma: gamma.as_slice().to_vec(),
        losses: task.losses(model)?,
        c_error,
        g_error,
        pareto_gap: star.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_cols(vals: &[f64]) -> GradientMatrix {
        GradientMatrix::from_columns(vals.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weight_step_examples() {
        let j = scalar_cols(&[1.0, -1.0]);
        let out = dynamic_weight_step(&w(&[0.5, 0.5]), &j, &j, 0.1, WeightUpdate::Matrix).unwrap();
        assert_eq!(out.as_slice(), &[0.5, 0.5]);

        let out = dynamic_weight_step(&w(&[1.0, 0.0]), &j, &j, 0.1, WeightUpdate::Matrix).unwrap();
        assert!((out[0] - 0.9).abs() < 1e-15 && (out[1] - 0.1).abs() < 1e-15);

        let out =
            dynamic_weight_step(&w(&[1.0, 0.0]), &j, &j, 0.1, WeightUpdate::LiteralDiagonal)
                .unwrap();
        assert_eq!(out.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn weight_step_errors() {
        let j = scalar_cols(&[1.0, -1.0]);
        let g = w(&[0.5, 0.5]);
        assert!(dynamic_weight_step(&g, &j, &j, -0.1, WeightUpdate::Matrix).is_err());
        assert!(dynamic_weight_step(&g, &j, &scalar_cols(&[1.0]), 0.1, WeightUpdate::Matrix).is_err());
        assert!(dynamic_weight_step(&w(&[1.0]), &j, &j, 0.1, WeightUpdate::Matrix).is_err());
        assert_eq!(dynamic_weight_step(&g, &j, &j, 0.0, WeightUpdate::Matrix).unwrap(), g);
    }

    #[test]
    fn model_step_examples() {
        let layout = Arc::new(Layout::shared(2));
        let m = JointModel::zeros(layout.clone());
        let j = GradientMatrix::from_columns(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let next = model_step(&m, &j, &w(&[0.5, 0.5]), 0.2).unwrap();
        assert!((next.params()[0] + 0.1).abs() < 1e-15 && (next.params()[1] + 0.1).abs() < 1e-15);
        assert_eq!(model_step(&m, &j, &w(&[0.5, 0.5]), 0.0).unwrap(), m);

        let m = JointModel::new(vec![1.0, 2.0], layout).unwrap();
        let g = GradientMatrix::from_columns(vec![vec![0.5, -1.0]]).unwrap();
        let next = model_step(&m, &g, &w(&[1.0]), 0.1).unwrap();
        assert_eq!(next.params(), &[1.0 - 0.1 * 0.5, 2.0 - 0.1 * -1.0]);

        assert!(model_step(&m, &GradientMatrix::zeros(3, 1), &w(&[1.0]), 0.1).is_err());
    }
}
