use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sliding window with its next-value target, in normalised units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub input: Vec<f64>,
    pub target: f64,
    /// Source signal (e.g. the band name) for multi-signal datasets.
    pub tag: Option<String>,
    /// Index of the first input value in the source trace.
    pub start: usize,
}

/// A mini-batch `d^i_{t,slot}` for one agent. Slot 0 marks a batch that
/// was not drawn by the sampler (full-batch or evaluation use).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub agent: usize,
    pub slot: u8,
}

impl SampleBatch {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>, agent: usize, slot: u8) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::invalid(format!(
                "batch needs equal, non-zero input/target counts (got {} / {})",
                inputs.len(),
                targets.len()
            )));
        }
        if slot > 3 {
            return Err(Error::invalid(format!("sample slot {slot} out of range")));
        }
        let w = inputs[0].len();
        if inputs.iter().any(|x| x.len() != w) {
            return Err(Error::invalid("batch windows differ in length"));
        }
        Ok(Self { inputs, targets, agent, slot })
    }

    pub fn from_windows<'a>(
        windows: impl IntoIterator<Item = &'a Window>,
        agent: usize,
        slot: u8,
    ) -> Result<Self> {
        let (inputs, targets) = windows
            .into_iter()
            .map(|w| (w.input.clone(), w.target))
            .unzip();
        Self::new(inputs, targets, agent, slot)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Generative description of an agent's data, for population gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionDescriptor {
    None,
    /// `x ~ N(0, I)`, `y = θᵀx + noise_std·ε`.
    LinearGaussian { theta: Vec<f64>, noise_std: f64 },
    /// `x_{k+1} = max(0, mean + φ(x_k − mean) + σε)` (clipping optional),
    /// reported in units of `scale`.
    Ar1 {
        mean: f64,
        phi: f64,
        noise_std: f64,
        scale: f64,
        clip_at_zero: bool,
    },
    /// IID uniform level indices `0..levels`, in units of `scale`.
    UniformLevels { levels: usize, scale: f64 },
    /// Equal-weight mixture of components.
    Mixture { components: Vec<DistributionDescriptor> },
}

/// Steps simulated before a fresh AR(1) window is read.
const AR1_BURN_IN: usize = 32;

impl DistributionDescriptor {
    /// Draws one fresh `(window, next value)` pair of length `w`.
    pub fn sample_window<R: Rng + ?Sized>(&self, w: usize, rng: &mut R) -> Result<(Vec<f64>, f64)> {
        match self {
            DistributionDescriptor::None | DistributionDescriptor::LinearGaussian { .. } => Err(
                Error::config("descriptor does not describe a time series"),
            ),
            DistributionDescriptor::Ar1 { mean, phi, noise_std, scale, clip_at_zero } => {
                let stationary = noise_std / (1.0 - phi * phi).sqrt();
                let noise = Normal::new(0.0, *noise_std)
                    .map_err(|e| Error::config(format!("bad AR(1) noise: {e}")))?;
                let start: f64 = StandardNormal.sample(rng);
                let mut x = mean + stationary * start;
                let clip = |v: f64| if *clip_at_zero { v.max(0.0) } else { v };
                x = clip(x);
                let mut values = Vec::with_capacity(w + 1);
                for k in 0..AR1_BURN_IN + w + 1 {
                    if k > 0 {
                        x = clip(mean + phi * (x - mean) + noise.sample(rng));
                    }
                    if k >= AR1_BURN_IN {
                        values.push(x / scale);
                    }
                }
                let target = values.pop().expect("w + 1 values");
                Ok((values, target))
            }
            DistributionDescriptor::UniformLevels { levels, scale } => {
                let mut draw = || rng.random_range(0..*levels) as f64 / scale;
                let values: Vec<f64> = (0..w).map(|_| draw()).collect();
                Ok((values, draw()))
            }
            DistributionDescriptor::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::config("empty mixture"));
                }
                let c = rng.random_range(0..components.len());
                components[c].sample_window(w, rng)
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, DistributionDescriptor::None)
    }
}

/// Disjoint train / holdout windows plus the generating distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub window: usize,
    pub train: Vec<Window>,
    pub holdout: Vec<Window>,
    pub descriptor: DistributionDescriptor,
}

impl DatasetSplit {
    pub fn validate(&self) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::config("training pool is empty"));
        }
        let all = self.train.iter().chain(&self.holdout);
        if let Some(bad) = all.clone().find(|w| w.input.len() != self.window) {
            return Err(Error::invalid(format!(
                "window at {} has length {}, expected {}",
                bad.start,
                bad.input.len(),
                self.window
            )));
        }
        let train: std::collections::HashSet<(Option<&str>, usize)> =
            self.train.iter().map(|w| (w.tag.as_deref(), w.start)).collect();
        if self.holdout.iter().any(|w| train.contains(&(w.tag.as_deref(), w.start))) {
            return Err(Error::invalid("train and holdout windows overlap"));
        }
        Ok(())
    }
}
