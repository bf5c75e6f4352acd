use std::sync::Arc;

use super::record::AgentRecord;
use crate::error::{Error, Result};
use crate::moo_core::{GradientMatrix, JointModel, Layout, PopulationQuery, StochasticTask};
use crate::objectives::{PredictorModel, MC_SAMPLES};
use crate::rng::SampleKey;

/// The agents' joint prediction problem: one shared backbone, one head per
/// agent, each head trained on its own agent's data and loss.
#[derive(Debug, Clone)]
pub struct CrossLayerTask {
    predictor: PredictorModel,
    agents: Vec<AgentRecord>,
    mc_budget: usize,
}

impl CrossLayerTask {
    /// `agents[i]` must own head `i` of `predictor`.
    pub fn new(predictor: PredictorModel, agents: Vec<AgentRecord>) -> Result<Self> {
        if agents.len() != predictor.num_heads() {
            return Err(Error::config(format!(
                "{} agents for a predictor with {} heads",
                agents.len(),
                predictor.num_heads()
            )));
        }
        for (i, a) in agents.iter().enumerate() {
            if a.head() != i {
                return Err(Error::config(format!(
                    "agent `{}` owns head {} but sits at position {i}",
                    a.card().id,
                    a.head()
                )));
            }
            if a.dataset().window != predictor.window() {
                return Err(Error::config(format!(
                    "agent `{}` has window {}, predictor expects {}",
                    a.card().id,
                    a.dataset().window,
                    predictor.window()
                )));
            }
        }
        Ok(Self { predictor, agents, mc_budget: MC_SAMPLES })
    }

    /// Fresh samples per population-gradient estimate.
    pub fn with_mc_budget(mut self, budget: usize) -> Self {
        self.mc_budget = budget;
        self
    }

    pub fn predictor(&self) -> &PredictorModel {
        &self.predictor
    }

    pub fn agents(&self) -> &[AgentRecord] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [AgentRecord] {
        &mut self.agents
    }
}

impl StochasticTask for CrossLayerTask {
    fn num_agents(&self) -> usize {
        self.agents.len()
    }

    fn layout(&self) -> Arc<Layout> {
        self.predictor.layout()
    }

    fn sample_gradient(&self, agent: usize, model: &JointModel, key: SampleKey) -> Result<Vec<f64>> {
        self.agents[agent].sample_with_key(&self.predictor, model, key)
    }

    fn full_gradients(&self, model: &JointModel) -> Result<GradientMatrix> {
        let cols = self
            .agents
            .iter()
            .map(|a| a.full_gradient(&self.predictor, model))
            .collect::<Result<Vec<_>>>()?;
        GradientMatrix::from_columns(cols)
    }

    fn losses(&self, model: &JointModel) -> Result<Vec<f64>> {
        self.agents
            .iter()
            .map(|a| a.train_loss(&self.predictor, model))
            .collect()
    }

    /// Monte-Carlo estimate. The stream depends on the run seed and agent
    /// only, so estimates at different iterates share their draws.
    fn population_gradients(
        &self,
        model: &JointModel,
        query: PopulationQuery,
    ) -> Result<Option<GradientMatrix>> {
        let cols = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.population_gradient(&self.predictor, model, self.mc_budget, &[query.seed, i as u64])
                    .map(|e| e.mean)
            })
            .collect::<Result<Vec<_>>>()?;
        GradientMatrix::from_columns(cols).map(Some)
    }
}
