//! Independent ground-truth paths: exact stochastic simulation, a truncated
//! master-equation solver, and hand-derived closed forms.

pub mod closed_form;
pub mod master;
pub mod sim;

pub use closed_form::{retrial_closed_form, retrial_loss_floor, RetrialStationaryMeans};
pub use master::{truncated_distribution, TruncatedDistribution};
pub use sim::{
    simulate, simulate_traced, MetricEstimate, SimulationConfig, SimulationResult, TraceEvent,
};
