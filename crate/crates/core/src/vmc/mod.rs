//! Variational Monte Carlo: Metropolis sampling, energy and gradient
//! estimators, gradient-descent updates and the ground-state training loop.

mod estimate;
mod optimize;
mod sampler;
mod train;

pub use estimate::{estimate_energy, estimate_gradient, EnergyEstimate, Estimator, GradientEstimate};
pub use optimize::{gd_update, sgd_update, sr_direction};
pub use sampler::{metropolis_step, sample, MetropolisChain, Proposal, SamplerOptions};
pub use train::{solve_ground_state, write_trace_csv, GroundStateResult, Optimizer, TraceRow, TrainConfig};
