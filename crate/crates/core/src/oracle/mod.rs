//! Exact solvers for small instances.

mod jobs;
mod orienteering;
mod twtsp;

use serde::{Deserialize, Serialize};

use crate::model::{Reward, Walk};

pub use jobs::{job_scheduling, Job, JobMode, Schedule, MAX_EXACT_JOBS};
pub use orienteering::{
    orienteering_exact, orienteering_greedy, shortest_tour, Target, Tour, TourMode, MAX_TARGETS,
};
pub use twtsp::{opt_twtsp, opt_twtsp_with_budget, state_count, DEFAULT_STATE_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: Reward,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walk: Option<Walk>,
    pub explored_states: u64,
}
