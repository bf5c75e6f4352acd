use std::io::Write;

use serde::{Deserialize, Serialize};

use super::intent::SemanticGoal;
use super::selection::{select_agents, Assignment};
use super::separation::{separate_task, SeparationTable, Subtask};
use crate::agents::{
    AgentRecord, CrossLayerTask, ExecutionInputs, Layer, Registry, ReportStatus, Sensing,
    SubtaskReport,
};
use crate::error::{Error, Result};
use crate::moo_core::{
    run_conflict_resolving, run_static_baseline, write_jsonl, IterationRecord, JointModel,
    RunConfig, RunOutput, StepSchedule, StochasticTask, WeightUpdate, WeightVector,
};
use crate::objectives::{PredictorModel, QuadraticOracle};
use crate::simenv::{build_datasets, generate_traces, AgentDatasets, DatasetParams, TraceConfig, TraceSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    Dynamic(WeightUpdate),
    /// Equal weights throughout.
    Static,
}

/// Objective the optimizer mediates over.
#[derive(Debug, Clone)]
pub enum TaskSelection {
    /// The agents' own predictors on their own data.
    CrossLayer,
    /// A quadratic stand-in with known constants. Agents then act with the
    /// seeded, untrained predictor.
    Quadratic(QuadraticOracle),
}

impl TaskSelection {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSelection::CrossLayer => "crosslayer-sim",
            TaskSelection::Quadratic(_) => "quadratic-oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoordinationConfig {
    pub schedule: StepSchedule,
    pub iterations: u64,
    pub weighting: Weighting,
    /// Stride between G-error evaluations; `0` disables them.
    pub g_error_every: u64,
    /// Fresh samples per population-gradient estimate.
    pub mc_budget: usize,
    /// Width of the shared predictor backbone.
    pub features: usize,
}

impl Default for CoordinationConfig {
    fn default() -> Self {
        Self {
            schedule: StepSchedule::theory_default(500),
            iterations: 500,
            weighting: Weighting::Dynamic(WeightUpdate::Matrix),
            g_error_every: 100,
            mc_budget: 10_000,
            features: PredictorModel::DEFAULT_FEATURES,
        }
    }
}

/// Scenario traces and the per-agent datasets cut from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub traces: TraceSet,
    pub datasets: AgentDatasets,
}

impl Environment {
    pub fn generate(trace: &TraceConfig, params: &DatasetParams, split_seed: u64) -> Result<Self> {
        let traces = generate_traces(trace)?;
        let datasets = build_datasets(&traces, params, split_seed)?;
        Ok(Self { traces, datasets })
    }

    fn record_inputs(&self, layer: Layer) -> (crate::objectives::DatasetSplit, Sensing) {
        let d = &self.datasets;
        match layer {
            Layer::Application => (
                d.application.clone(),
                Sensing { traces: vec![self.traces.requests.clone()], scale: d.request_scale },
            ),
            Layer::Physical => (
                d.physical.clone(),
                Sensing { traces: self.traces.bands.clone(), scale: d.rate_scale },
            ),
            Layer::Network => (
                d.network.clone(),
                Sensing { traces: vec![self.traces.bandwidth.clone()], scale: d.bandwidth_scale },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub fulfilled: bool,
    pub failed_subtasks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationLog {
    pub goal: SemanticGoal,
    pub subtasks: Vec<Subtask>,
    pub assignment: Assignment,
    pub task: String,
    pub records: Vec<IterationRecord>,
    pub reports: Vec<SubtaskReport>,
    pub verdict: Option<Verdict>,
    pub config: CoordinationConfig,
    pub seed: u64,
}

impl CoordinationLog {
    pub fn write_metrics<W: Write>(&self, out: W) -> Result<()> {
        write_jsonl(&self.records, out)
    }

    /// Everything except the per-iteration records.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "goal": self.goal,
            "subtasks": self.subtasks,
            "assignment": self.assignment,
            "task": self.task,
            "iterations": self.records.len(),
            "reports": self.reports,
            "verdict": self.verdict,
            "config": self.config,
            "seed": self.seed,
        })
    }

    pub fn fulfilled(&self) -> bool {
        self.verdict.as_ref().is_some_and(|v| v.fulfilled)
    }
}

/// A detected goal with its subtasks and their assigned agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub goal: SemanticGoal,
    pub subtasks: Vec<Subtask>,
    pub assignment: Assignment,
}

impl Plan {
    /// Separates the goal and selects one agent per subtask.
    pub fn new(goal: SemanticGoal, separation: &SeparationTable, registry: &Registry) -> Result<Self> {
        let subtasks = separate_task(&goal, separation)?;
        let assignment = select_agents(&subtasks, registry)?;
        Ok(Self { goal, subtasks, assignment })
    }
}

/// Runs conflict mediation over the assigned agents, then activates each
/// agent with the trained model and evaluates the goal.
///
/// Network and physical agents act first; the application agent receives
/// the smaller of their predicted rates as its available rate.
pub fn coordinate(
    plan: &Plan,
    registry: &Registry,
    env: &Environment,
    selection: &TaskSelection,
    cfg: &CoordinationConfig,
    seed: u64,
) -> Result<CoordinationLog> {
    let Plan { goal, subtasks, assignment } = plan;
    let task = build_task(plan, registry, env, cfg, seed)?;
    let run_cfg = RunConfig::new(cfg.schedule, cfg.iterations, seed).with_g_error_every(cfg.g_error_every);

    let (records, omega) = match selection {
        TaskSelection::CrossLayer => {
            let out = optimize(&task, &run_cfg, cfg.weighting)?;
            let omega = out.final_state().model.clone();
            (out.records, omega)
        }
        TaskSelection::Quadratic(oracle) => {
            if oracle.num_agents() != subtasks.len() {
                return Err(Error::config(format!(
                    "quadratic stand-in has {} agents for {} subtasks",
                    oracle.num_agents(),
                    subtasks.len()
                )));
            }
            let out = optimize(oracle, &run_cfg, cfg.weighting)?;
            (out.records, task.initial_model(seed))
        }
    };

    let reports = execute_all(&task, subtasks, &omega);
    let verdict = evaluate_goal(subtasks, &reports)?;
    Ok(CoordinationLog {
        goal: goal.clone(),
        subtasks: subtasks.clone(),
        assignment: assignment.clone(),
        task: selection.name().into(),
        records,
        reports,
        verdict: Some(verdict),
        config: *cfg,
        seed,
    })
}

/// The cross-layer task over the plan's agents, head `i` serving subtask `i`.
pub fn build_task(
    plan: &Plan,
    registry: &Registry,
    env: &Environment,
    cfg: &CoordinationConfig,
    seed: u64,
) -> Result<CrossLayerTask> {
    let Plan { goal, subtasks, assignment } = plan;
    let records = subtasks
        .iter()
        .enumerate()
        .map(|(head, s)| {
            let entry = assignment
                .entries
                .iter()
                .find(|e| e.subtask_id == s.id)
                .ok_or_else(|| Error::Assignment(format!("subtask `{}` is unassigned", s.id)))?;
            let card = registry
                .get(entry.agent_index)
                .filter(|c| c.id == entry.agent_id)
                .ok_or_else(|| {
                    Error::Assignment(format!("agent `{}` is not registered", entry.agent_id))
                })?;
            if card.layer != s.layer {
                return Err(Error::Assignment(format!(
                    "agent `{}` ({}) cannot serve {}-layer subtask `{}`",
                    card.id, card.layer, s.layer, s.id
                )));
            }
            let (dataset, sensing) = env.record_inputs(s.layer);
            AgentRecord::new(card.clone(), head, dataset, sensing, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    if records.is_empty() {
        return Err(Error::config(format!("goal `{}` has no subtasks", goal.id)));
    }

    let heads: Vec<&str> = records.iter().map(|r| r.card().id.as_str()).collect();
    let predictor = PredictorModel::new(env.datasets.application.window, cfg.features, &heads)?;
    Ok(CrossLayerTask::new(predictor, records)?.with_mc_budget(cfg.mc_budget))
}

fn optimize<T: StochasticTask>(task: &T, cfg: &RunConfig, weighting: Weighting) -> Result<RunOutput> {
    match weighting {
        Weighting::Dynamic(v) => run_conflict_resolving(task, &cfg.clone().with_variant(v)),
        Weighting::Static => run_static_baseline(task, &WeightVector::uniform(task.num_agents()), cfg),
    }
}

fn execute_all(task: &CrossLayerTask, subtasks: &[Subtask], omega: &JointModel) -> Vec<SubtaskReport> {
    let run = |i: usize, inputs: &ExecutionInputs| {
        let agent = &task.agents()[i];
        agent
            .execute_subtask(&subtasks[i], task.predictor(), omega, inputs)
            .unwrap_or_else(|e| SubtaskReport::failed(&agent.card().id, &subtasks[i].id, &e))
    };
    let mut reports: Vec<Option<SubtaskReport>> = vec![None; subtasks.len()];
    let mut available: Option<f64> = None;
    for (i, s) in subtasks.iter().enumerate() {
        if s.layer != Layer::Application {
            let r = run(i, &ExecutionInputs::default());
            if r.status == ReportStatus::Completed {
                if let Some(v) = r.action_value {
                    available = Some(available.map_or(v, |a: f64| a.min(v)));
                }
            }
            reports[i] = Some(r);
        }
    }
    let inputs = ExecutionInputs { available_rate_mbps: available };
    for (i, s) in subtasks.iter().enumerate() {
        if s.layer == Layer::Application {
            reports[i] = Some(run(i, &inputs));
        }
    }
    reports.into_iter().flatten().collect()
}

/// Fulfilled iff every subtask reported completion.
pub fn evaluate_goal(subtasks: &[Subtask], reports: &[SubtaskReport]) -> Result<Verdict> {
    let missing: Vec<String> = subtasks
        .iter()
        .filter(|s| !reports.iter().any(|r| r.subtask_id == s.id))
        .map(|s| s.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteEvaluation(missing));
    }
    let failed: Vec<String> = subtasks
        .iter()
        .filter(|s| {
            reports
                .iter()
                .any(|r| r.subtask_id == s.id && r.status == ReportStatus::Failed)
        })
        .map(|s| s.id.clone())
        .collect();
    Ok(Verdict {
        fulfilled: failed.is_empty(),
        failed_subtasks: failed,
    })
}
