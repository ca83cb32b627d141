use rayon::prelude::*;

use crate::cfn::{CfnProblem, SolutionRecord};

use super::anneal::{hf_run, mc_run, AnnealOutcome, HfConfig, McConfig};
use super::SolverError;

/// A trajectory-based solver; its seed is replaced per replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalSolver {
    Mc(McConfig),
    Hf(McConfig, HfConfig),
}

impl ClassicalSolver {
    fn config(&self) -> &McConfig {
        match self {
            ClassicalSolver::Mc(c) | ClassicalSolver::Hf(c, _) => c,
        }
    }

    pub fn run(&self, problem: &CfnProblem, seed: u64) -> AnnealOutcome {
        match *self {
            ClassicalSolver::Mc(c) => mc_run(problem, &McConfig { seed, ..c }),
            ClassicalSolver::Hf(c, hf) => hf_run(problem, &McConfig { seed, ..c }, &hf),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateReport {
    pub best: SolutionRecord,
    pub best_replicate: usize,
    /// One outcome per replicate, in replicate order.
    pub replicates: Vec<AnnealOutcome>,
}

impl ReplicateReport {
    /// Every archived record of every replicate.
    pub fn archived(&self) -> impl Iterator<Item = &SolutionRecord> {
        self.replicates.iter().flat_map(|r| r.archive.iter())
    }
}

/// Run `count` independent trajectories with seeds `base_seed + r`.
///
/// The result does not depend on how the replicates are scheduled: the best
/// record is the lowest score, ties going to the lowest replicate index.
pub fn run_replicates(
    problem: &CfnProblem,
    solver: &ClassicalSolver,
    count: usize,
    base_seed: u64,
) -> Result<ReplicateReport, SolverError> {
    if count == 0 {
        return Err(SolverError::BadConfig(
            "at least one replicate is required".into(),
        ));
    }
    solver.config().validate()?;
    let replicates: Vec<AnnealOutcome> = (0..count)
        .into_par_iter()
        .map(|r| solver.run(problem, base_seed.wrapping_add(r as u64)))
        .collect();
    let mut best_replicate = 0;
    for (r, outcome) in replicates.iter().enumerate() {
        if outcome.best.score < replicates[best_replicate].best.score {
            best_replicate = r;
        }
    }
    Ok(ReplicateReport {
        best: replicates[best_replicate].best.clone(),
        best_replicate,
        replicates,
    })
}
