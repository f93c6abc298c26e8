//! Distributed secondary frequency control for power grids with unreliable
//! communication.
//!
//! The plant is the linearized swing equation with DC line flows. Every node
//! adjusts its power `u_i` so that frequency returns to nominal and the
//! steady-state dispatch minimizes `sum_i C_i u_i^2`. Controllers:
//!
//! * distributed averaging over the communication graph, with instantaneous or
//!   sampled neighbor values,
//! * a flow-driven law for pairs that lose their link, where an artificial
//!   variable driven by the frequency difference stands in for the missing
//!   marginal cost of the neighbor,
//! * hybrids of both for single and multiple link failures, and a round-robin
//!   schedule that activates one pair at a time.

pub mod batch;
pub mod controllers;
pub mod dispatch;
pub mod error;
pub mod grid_model;
pub mod repro;
pub mod scenario_file;
pub mod simulator;
pub mod stability;
pub mod state;

pub use dispatch::{cost_of, optimal_dispatch, DispatchResult};
pub use error::{Error, Result};
pub use grid_model::{toy_grid, CommGraph, MessageInterval, PowerGrid, Scenario, Scheme};
pub use simulator::{integrate, run_scenario, summarize, ConvergenceTime, RunSummary, Trajectory};
pub use state::SystemState;
