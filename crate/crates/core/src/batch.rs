//! Running many independent jobs (scenarios, random draws) at once.
//!
//! With the `parallel` feature the `*_batch` functions fan out over the rayon
//! thread pool; without it they fall back to the sequential versions. Output
//! order always follows input order.

use crate::error::Result;
use crate::grid_model::Scenario;
use crate::simulator::{run_scenario, RunSummary, Trajectory};

/// Applies `f` to every item, in parallel when the feature is enabled.
pub fn map_batch<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<(Trajectory, RunSummary)>> {
    map_batch(scenarios, run_scenario)
}

pub fn run_sequential(scenarios: &[Scenario]) -> Vec<Result<(Trajectory, RunSummary)>> {
    map_sequential(scenarios, run_scenario)
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
