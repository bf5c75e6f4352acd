//! Conflict-resolving coordination of cross-layer network agents.
//!
//! The crate is organised bottom-up:
//!
//! * [`moo_core`]: simplex geometry, the min-norm Pareto-stationary weight
//!   solver, conflict (C-error) and generalization (G-error) metrics, the
//!   dynamic-weighting stochastic multi-gradient optimizer with its
//!   static-weight baseline, and evaluators for the convergence bounds.
//! * [`objectives`]: losses with analytic gradients, oracle tasks with known
//!   structure, the shared-backbone predictor and a finite-difference checker.
//! * [`simenv`]: synthetic request / channel-rate / bandwidth traces and the
//!   per-agent dataset splits built from them.
//! * [`agents`]: capability cards, the registry, per-layer agents that sample
//!   gradients and execute subtasks.
//! * [`controller`]: goal detection, task separation, agent selection,
//!   conflict-mediated coordination and fulfillment evaluation.
//! * [`cli`]: experiment configuration and the commands behind the `xlayer`
//!   binary.
//!
//! Runnable programs for each capability live in `examples/`.

pub mod agents;
pub mod cli;
pub mod controller;
pub mod error;
pub mod moo_core;
pub mod objectives;
pub mod rng;
pub mod simenv;

pub use error::{Error, Result};
