//! Receding-horizon simulation of prioritized planning.
//!
//! Every step builds the coupling graph from the current vehicle states,
//! assigns priorities, solves the agents level by level so that each one
//! avoids the predictions of its higher-priority neighbors, and applies the
//! first step of every plan.

pub mod coupling;
pub mod intersection;
pub mod runner;
pub mod scenario;

pub use coupling::{build_coupling, reach_radius};
pub use runner::{median, normalized_cost, run_experiment, AgentRecord, Experiment, Simulation, StepRecord, Summary};
pub use scenario::{PlannerSettings, Scenario, TimingSettings, VehicleSpec};
