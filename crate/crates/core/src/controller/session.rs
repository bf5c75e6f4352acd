use super::coordinate::{coordinate, CoordinationConfig, CoordinationLog, Environment, Plan, TaskSelection};
use super::intent::{detect_goal, IntentTable, SemanticGoal};
use super::queue::GoalQueue;
use super::separation::SeparationTable;
use crate::agents::Registry;
use crate::error::Result;

/// A controller holding its tables, the agent registry and the goal queue.
///
/// Only one task runs at a time; goals submitted meanwhile wait in the
/// queue and run in arrival order.
#[derive(Debug, Clone)]
pub struct Controller {
    intents: IntentTable,
    separation: SeparationTable,
    registry: Registry,
    queue: GoalQueue,
}

impl Controller {
    pub fn new(intents: IntentTable, separation: SeparationTable, registry: Registry) -> Result<Self> {
        intents.validate()?;
        separation.validate()?;
        Ok(Self {
            intents,
            separation,
            registry,
            queue: GoalQueue::default(),
        })
    }

    pub fn with_queue(mut self, queue: GoalQueue) -> Self {
        self.queue = queue;
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn queue(&self) -> &GoalQueue {
        &self.queue
    }

    pub fn detect(&self, utterance: &str) -> Option<SemanticGoal> {
        detect_goal(utterance, &self.intents)
    }

    pub fn plan(&self, goal: SemanticGoal) -> Result<Plan> {
        Plan::new(goal, &self.separation, &self.registry)
    }

    /// Detects a goal and queues it. `Ok(None)` when nothing matched.
    pub fn submit(&mut self, utterance: &str) -> Result<Option<SemanticGoal>> {
        match self.detect(utterance) {
            Some(goal) => {
                self.queue.push(goal.clone())?;
                Ok(Some(goal))
            }
            None => Ok(None),
        }
    }

    /// Runs every queued goal to completion, oldest first.
    pub fn run_pending(
        &mut self,
        env: &Environment,
        selection: &TaskSelection,
        cfg: &CoordinationConfig,
        seed: u64,
    ) -> Vec<Result<CoordinationLog>> {
        std::iter::from_fn(|| self.queue.pop())
            .collect::<Vec<_>>()
            .into_iter()
            .map(|goal| {
                let plan = self.plan(goal)?;
                coordinate(&plan, &self.registry, env, selection, cfg, seed)
            })
            .collect()
    }
}
