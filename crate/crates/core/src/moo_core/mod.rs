//! Multi-objective core: simplex geometry, min-norm weights, conflict and
//! generalization metrics, the dynamic-weighting optimizer and bound
//! evaluators.

mod bounds;
mod metrics;
mod min_norm;
mod optimizer;
mod schedule;
mod simplex;
mod types;

pub(crate) mod linalg;

pub use bounds::{
    c_error_bound, fit_g_error_scaling, g_error_order, log_log_slope, BoundInputs, ScalingFit,
    ScalingRun,
};
pub use metrics::{conflict_error, generalization_error, per_agent_g_error};
pub use min_norm::{min_norm_weights, pareto_gap, MinNorm};
pub use optimizer::{
    dynamic_weight_step, model_step, run_conflict_resolving, run_static_baseline, write_jsonl,
    IterationRecord, Mode, OptimizerState, PopulationQuery, RunConfig, RunOutput, StochasticTask,
    WeightUpdate,
};
pub use schedule::{ScheduleKind, StepSchedule};
pub use simplex::project_to_simplex;
pub use types::{GradientMatrix, JointModel, Layout, Segment, SegmentRole, WeightVector};

/// Absolute tolerance on the weight-sum constraint.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Standard deviation of the seeded Gaussian used for `Ω₀`.
pub const INIT_STD: f64 = 0.01;
