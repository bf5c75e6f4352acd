use std::ops::Range;
use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::linalg::{all_finite, dot};
use super::SIMPLEX_TOL;
use crate::error::{Error, Result};
use crate::rng::{keyed_rng, Stream};

/// A point on the probability simplex: one non-negative weight per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weight vector must be non-empty"));
        }
        if !all_finite(&weights) {
            return Err(Error::invalid("weight vector has non-finite entries"));
        }
        if let Some(w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::invalid(format!("negative weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self(weights))
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform weights need at least one agent");
        Self(vec![1.0 / k as f64; k])
    }

    /// Vertex `e_i` of the simplex.
    pub fn vertex(k: usize, i: usize) -> Self {
        let mut w = vec![0.0; k];
        w[i] = 1.0;
        Self(w)
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|&w| w >= 0.0));
        Self(weights)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-agent gradients of the joint parameter vector, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMatrix {
    dim: usize,
    columns: Vec<Vec<f64>>,
}

impl GradientMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let dim = columns
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("gradient matrix needs at least one column"))?;
        if dim == 0 {
            return Err(Error::invalid("gradient columns must be non-empty"));
        }
        for (i, c) in columns.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::invalid(format!(
                    "column {i} has dimension {}, expected {dim}",
                    c.len()
                )));
            }
        }
        Ok(Self { dim, columns })
    }

    pub fn zeros(dim: usize, agents: usize) -> Self {
        Self {
            dim,
            columns: vec![vec![0.0; dim]; agents],
        }
    }

    /// Parameter dimension `P`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_agents(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// `J w`, accumulated in agent order.
    pub fn combine(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.num_agents() {
            return Err(Error::invalid(format!(
                "{} weights for {} agents",
                w.len(),
                self.num_agents()
            )));
        }
        let mut out = vec![0.0; self.dim];
        for (col, &wi) in self.columns.iter().zip(w) {
            for (o, g) in out.iter_mut().zip(col) {
                *o += wi * g;
            }
        }
        Ok(out)
    }

    /// `Jᵀ J`.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.cross_gram_unchecked(self)
    }

    /// `selfᵀ other`; entry `(i, j)` is `⟨self_i, other_j⟩`.
    pub fn cross_gram(&self, other: &GradientMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_same_shape(other)?;
        Ok(self.cross_gram_unchecked(other))
    }

    fn cross_gram_unchecked(&self, other: &GradientMatrix) -> Vec<Vec<f64>> {
        self.columns
            .iter()
            .map(|a| other.columns.iter().map(|b| dot(a, b)).collect())
            .collect()
    }

    pub fn check_same_shape(&self, other: &GradientMatrix) -> Result<()> {
        if self.dim != other.dim || self.num_agents() != other.num_agents() {
            return Err(Error::invalid(format!(
                "gradient matrices differ in shape: {}x{} vs {}x{}",
                self.dim,
                self.num_agents(),
                other.dim,
                other.num_agents()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.columns.iter().all(|c| all_finite(c))
    }
}

/// Role of a contiguous block of the joint parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentRole {
    Shared,
    Agent(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub role: SegmentRole,
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Maps slices of `Ω` to the shared backbone and the per-agent blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    segments: Vec<Segment>,
    dim: usize,
}

impl Layout {
    /// Segments must be contiguous, non-overlapping and start at 0.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("layout needs at least one segment"));
        }
        let mut end = 0;
        for s in &segments {
            if s.start != end {
                return Err(Error::invalid(format!(
                    "segment `{}` starts at {}, expected {end}",
                    s.name, s.start
                )));
            }
            if s.len == 0 {
                return Err(Error::invalid(format!("segment `{}` is empty", s.name)));
            }
            end += s.len;
        }
        Ok(Self { segments, dim: end })
    }

    /// One shared block covering all of `Ω`.
    pub fn shared(dim: usize) -> Self {
        Self::new(vec![Segment {
            name: "shared".into(),
            role: SegmentRole::Shared,
            start: 0,
            len: dim,
        }])
        .expect("non-empty shared layout")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn agent_range(&self, agent: usize) -> Option<Range<usize>> {
        self.segments
            .iter()
            .find(|s| s.role == SegmentRole::Agent(agent))
            .map(Segment::range)
    }

    pub fn shared_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.segments
            .iter()
            .filter(|s| s.role == SegmentRole::Shared)
            .map(Segment::range)
    }
}

/// The concatenated parameter vector `Ω` with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    params: Vec<f64>,
    layout: Arc<Layout>,
}

impl JointModel {
    pub fn new(params: Vec<f64>, layout: Arc<Layout>) -> Result<Self> {
        if params.len() != layout.dim() {
            return Err(Error::invalid(format!(
                "{} parameters for a layout of dimension {}",
                params.len(),
                layout.dim()
            )));
        }
        Ok(Self { params, layout })
    }

    pub fn zeros(layout: Arc<Layout>) -> Self {
        Self {
            params: vec![0.0; layout.dim()],
            layout,
        }
    }

    /// Gaussian initialisation with the given standard deviation, keyed by seed.
    pub fn seeded_gaussian(layout: Arc<Layout>, seed: u64, std_dev: f64) -> Self {
        let mut rng = keyed_rng(seed, Stream::Init, &[]);
        let normal = Normal::new(0.0, std_dev).expect("finite std dev");
        let params = (0..layout.dim()).map(|_| normal.sample(&mut rng)).collect();
        Self { params, layout }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn layout_arc(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub(crate) fn with_params(&self, params: Vec<f64>) -> Self {
        debug_assert_eq!(params.len(), self.params.len());
        Self {
            params,
            layout: Arc::clone(&self.layout),
        }
    }
}
