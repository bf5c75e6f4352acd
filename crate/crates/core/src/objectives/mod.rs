//! Losses with analytic gradients, oracle tasks and the shared-backbone
//! predictor used by the cross-layer agents.

mod data;
mod fd;
mod linear_gaussian;
mod loss;
mod population;
mod predictor;
mod quadratic;

pub use data::{DatasetSplit, DistributionDescriptor, SampleBatch, Window};
pub use fd::finite_difference_check;
pub use linear_gaussian::LinearGaussianTask;
pub use loss::{loss_and_gradient, LossKind};
pub use population::{monte_carlo_mean, predictor_population_gradient, PopulationEstimate, MC_SAMPLES};
pub use predictor::PredictorModel;
pub use quadratic::{
    lipschitz_constants, quadratic_gradients, QuadraticAgent, QuadraticOracle, QuadraticTask,
};
