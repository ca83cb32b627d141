use crate::cfn::{Assignment, CfnProblem, SolutionRecord};

use super::SolverError;

/// Largest number of states `brute_force_solve` will enumerate.
pub const MAX_BRUTE_FORCE_STATES: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteForceMode {
    /// Every combination of choices, overlapping seats included.
    AllCombos,
    /// Only assignments in which no two nodes share a label.
    PermutationsOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub optimum: f64,
    /// Every optimal assignment, in lexicographic order.
    pub solutions: Vec<SolutionRecord>,
    pub states_visited: u64,
}

/// Upper bound on the states `mode` would enumerate.
pub fn search_space_size(problem: &CfnProblem, mode: BruteForceMode) -> u128 {
    let product = (0..problem.node_count()).fold(1u128, |acc, i| {
        acc.saturating_mul(problem.choice_count(i) as u128)
    });
    match mode {
        BruteForceMode::AllCombos => product,
        BruteForceMode::PermutationsOnly => {
            let mut labels: Vec<usize> = (0..problem.node_count())
                .flat_map(|i| problem.labels(i).iter().copied())
                .collect();
            labels.sort_unstable();
            labels.dedup();
            let distinct = labels.len() as u128;
            let n = problem.node_count() as u128;
            let falling = if n > distinct {
                0
            } else {
                (0..n).fold(1u128, |acc, k| acc.saturating_mul(distinct - k))
            };
            product.min(falling)
        }
    }
}

fn ties(a: f64, b: f64) -> bool {
    b.is_finite() && (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

struct Search<'a> {
    problem: &'a CfnProblem,
    mode: BruteForceMode,
    current: Vec<usize>,
    used: Vec<bool>,
    best: f64,
    argmin: Vec<Vec<usize>>,
    visited: u64,
}

impl Search<'_> {
    /// Score of the terms that involve node `i` and nodes before it.
    fn partial(&self, i: usize, choice: usize) -> f64 {
        let mut s = self.problem.one_node(i)[choice];
        for j in 0..i {
            s += self.problem.pair_value(j, self.current[j], i, choice);
        }
        s
    }

    fn descend(&mut self, i: usize, acc: f64) {
        let n = self.problem.node_count();
        if i == n {
            self.visited += 1;
            if ties(acc, self.best) {
                self.argmin.push(self.current.clone());
            } else if acc < self.best {
                self.best = acc;
                self.argmin.clear();
                self.argmin.push(self.current.clone());
            }
            return;
        }
        for c in 0..self.problem.choice_count(i) {
            let label = self.problem.label(i, c);
            if self.mode == BruteForceMode::PermutationsOnly && self.used[label] {
                continue;
            }
            let part = self.partial(i, c);
            self.current[i] = c;
            self.used[label] = true;
            self.descend(i + 1, acc + part);
            self.used[label] = false;
        }
    }
}

/// Exhaustively find the optimum and every assignment that reaches it.
pub fn brute_force_solve(
    problem: &CfnProblem,
    mode: BruteForceMode,
) -> Result<BruteForceResult, SolverError> {
    let size = search_space_size(problem, mode);
    if size > MAX_BRUTE_FORCE_STATES {
        return Err(SolverError::SearchSpaceTooLarge {
            states: size,
            limit: MAX_BRUTE_FORCE_STATES,
        });
    }
    let label_span = (0..problem.node_count())
        .flat_map(|i| problem.labels(i).iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut search = Search {
        problem,
        mode,
        current: vec![0; problem.node_count()],
        used: vec![false; label_span],
        best: f64::INFINITY,
        argmin: Vec::new(),
        visited: 0,
    };
    search.descend(0, problem.constant_offset());
    if search.argmin.is_empty() {
        return Err(SolverError::NoFeasibleState);
    }
    let tag = match mode {
        BruteForceMode::AllCombos => "brute-all",
        BruteForceMode::PermutationsOnly => "brute",
    };
    let visited = search.visited;
    let solutions: Vec<SolutionRecord> = search
        .argmin
        .into_iter()
        .map(|c| SolutionRecord::new(problem, Assignment::new(c), tag, 0, visited))
        .collect();
    let optimum = solutions
        .iter()
        .map(|s| s.score)
        .fold(f64::INFINITY, f64::min);
    Ok(BruteForceResult {
        optimum,
        solutions,
        states_visited: visited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfn::CfnBuilder;

    #[test]
    fn zero_problem_all_states_optimal() {
        let p = CfnBuilder::with_choice_counts(&[2, 2]).build().unwrap();
        let r = brute_force_solve(&p, BruteForceMode::AllCombos).unwrap();
        assert_eq!(r.optimum, 0.0);
        assert_eq!(r.solutions.len(), 4);
        let order: Vec<_> = r.solutions.iter().map(|s| s.assignment.0.clone()).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn permutations_skip_shared_labels() {
        let p = CfnBuilder::with_choice_counts(&[3, 3]).build().unwrap();
        let r = brute_force_solve(&p, BruteForceMode::PermutationsOnly).unwrap();
        assert_eq!(r.states_visited, 6);
        assert_eq!(search_space_size(&p, BruteForceMode::PermutationsOnly), 6);
    }

    #[test]
    fn guard_rejects_huge_spaces() {
        let p = CfnBuilder::with_choice_counts(&[40; 8]).build().unwrap();
        assert!(matches!(
            brute_force_solve(&p, BruteForceMode::AllCombos),
            Err(SolverError::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn no_injective_state() {
        let p = CfnBuilder::new(vec![vec![0], vec![0]]).build().unwrap();
        assert_eq!(
            brute_force_solve(&p, BruteForceMode::PermutationsOnly),
            Err(SolverError::NoFeasibleState)
        );
    }
}
