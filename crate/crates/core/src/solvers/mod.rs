//! Classical solvers: exhaustive enumeration, annealed Monte Carlo and its
//! hill-flattening variant, and a deterministic multi-replicate runner.

mod anneal;
mod brute;
mod replicate;

use thiserror::Error;

pub use anneal::{
    hf_run, hf_solve, hf_trace, hf_transform, mc_run, mc_solve, mc_trace, AnnealOutcome,
    AnnealSchedule, HfConfig, McConfig, ScheduleShape, Trace, DEFAULT_SWAP_FRACTION, DEFAULT_T_LOW,
};
pub use brute::{
    brute_force_solve, search_space_size, BruteForceMode, BruteForceResult, MAX_BRUTE_FORCE_STATES,
};
pub use replicate::{run_replicates, ClassicalSolver, ReplicateReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("search space of {states} states exceeds the limit of {limit}")]
    SearchSpaceTooLarge { states: u128, limit: u128 },
    #[error("no assignment gives every node a distinct seat")]
    NoFeasibleState,
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
}
