//! The agent controller: goal detection, task separation, agent selection,
//! coordination with conflict mediation, and fulfillment evaluation.

mod coordinate;
mod intent;
mod queue;
mod selection;
mod separation;
mod session;

pub use coordinate::{
    build_task, coordinate, evaluate_goal, CoordinationConfig, CoordinationLog, Environment, Plan, TaskSelection,
    Verdict, Weighting,
};
pub use intent::{default_intents, detect_goal, Intent, IntentTable, SemanticGoal};
pub use queue::{GoalQueue, DEFAULT_QUEUE_CAPACITY};
pub use selection::{select_agents, Assignment, AssignmentEntry};
pub use separation::{default_separation, separate_task, SeparationEntry, SeparationTable, Subtask, SubtaskTemplate};
pub use session::Controller;
