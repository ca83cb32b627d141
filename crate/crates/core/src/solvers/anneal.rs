//! Simulated-annealing Metropolis Monte Carlo over CFN assignments, plus
//! the hill-flattening variant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cfn::{Assignment, CfnProblem, SolutionRecord};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleShape {
    /// `t_high * (t_low / t_high)^(step / (steps - 1))`
    #[default]
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub t_high: f64,
    pub t_low: f64,
    pub steps: u64,
    pub shape: ScheduleShape,
}

/// Default final temperature.
pub const DEFAULT_T_LOW: f64 = 0.01;

impl AnnealSchedule {
    pub fn new(t_high: f64, t_low: f64, steps: u64) -> Result<Self, SolverError> {
        if !(t_low > 0.0 && t_high >= t_low && t_high.is_finite()) {
            return Err(SolverError::BadConfig(format!(
                "temperatures must satisfy t_high >= t_low > 0, got {t_high} and {t_low}"
            )));
        }
        if steps == 0 {
            return Err(SolverError::BadConfig(
                "schedule needs at least one step".into(),
            ));
        }
        Ok(Self {
            t_high,
            t_low,
            steps,
            shape: ScheduleShape::Geometric,
        })
    }

    /// Starts at the largest two-node magnitude so early moves are close to
    /// random, and cools to [`DEFAULT_T_LOW`].
    pub fn for_problem(problem: &CfnProblem, steps: u64) -> Self {
        let scale = problem.max_abs_pair_value();
        let t_high = if scale > 0.0 { scale } else { 1.0 };
        Self {
            t_high: t_high.max(DEFAULT_T_LOW),
            t_low: DEFAULT_T_LOW,
            steps: steps.max(1),
            shape: ScheduleShape::Geometric,
        }
    }

    pub fn temperature(&self, step: u64) -> f64 {
        match self.shape {
            ScheduleShape::Geometric => {
                if self.steps <= 1 {
                    return self.t_high;
                }
                let frac = step as f64 / (self.steps - 1) as f64;
                self.t_high * (self.t_low / self.t_high).powf(frac)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub schedule: AnnealSchedule,
    /// Probability of proposing a two-node seat swap instead of a single reassignment.
    pub swap_move_fraction: f64,
    pub seed: u64,
    /// Number of distinct lowest-scoring states kept from the trajectory.
    pub archive_size: usize,
}

pub const DEFAULT_SWAP_FRACTION: f64 = 0.5;

impl McConfig {
    pub fn for_problem(problem: &CfnProblem, steps: u64, seed: u64) -> Self {
        Self {
            schedule: AnnealSchedule::for_problem(problem, steps),
            swap_move_fraction: DEFAULT_SWAP_FRACTION,
            seed,
            archive_size: 1,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        AnnealSchedule::new(
            self.schedule.t_high,
            self.schedule.t_low,
            self.schedule.steps,
        )?;
        if !(0.0..=1.0).contains(&self.swap_move_fraction) {
            return Err(SolverError::BadConfig(format!(
                "swap fraction must lie in [0, 1], got {}",
                self.swap_move_fraction
            )));
        }
        if self.archive_size == 0 {
            return Err(SolverError::BadConfig(
                "archive size must be at least one".into(),
            ));
        }
        Ok(())
    }
}

/// Hill-flattening parameters: scores more than `ceiling_h` above the best
/// seen so far are compressed by `slope_kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfConfig {
    pub ceiling_h: f64,
    pub slope_kappa: f64,
}

impl HfConfig {
    pub fn new(ceiling_h: f64, slope_kappa: f64) -> Result<Self, SolverError> {
        if !(ceiling_h > 0.0 && ceiling_h.is_finite()) {
            return Err(SolverError::BadConfig(format!(
                "hill-flattening ceiling must be positive, got {ceiling_h}"
            )));
        }
        if !(slope_kappa > 0.0 && slope_kappa <= 1.0) {
            return Err(SolverError::BadConfig(format!(
                "hill-flattening slope must lie in (0, 1], got {slope_kappa}"
            )));
        }
        Ok(Self {
            ceiling_h,
            slope_kappa,
        })
    }

    /// Ceiling of ten starting temperatures, slope 0.1.
    pub fn for_schedule(schedule: &AnnealSchedule) -> Self {
        Self {
            ceiling_h: 10.0 * schedule.t_high,
            slope_kappa: 0.1,
        }
    }
}

/// Soft clamp of `raw` to `best_so_far + h`, continuing with slope `kappa` above it.
pub fn hf_transform(raw: f64, best_so_far: f64, config: &HfConfig) -> f64 {
    let ceiling = best_so_far + config.ceiling_h;
    if raw <= ceiling || config.slope_kappa == 1.0 {
        raw
    } else {
        ceiling + config.slope_kappa * (raw - ceiling)
    }
}

#[derive(Debug, Clone, Copy)]
enum Acceptance {
    Plain,
    Flattened(HfConfig),
}

impl Acceptance {
    /// Energy change the Metropolis test sees.
    #[inline]
    fn effective_delta(&self, current: f64, delta: f64, best: f64) -> f64 {
        match self {
            Acceptance::Plain => delta,
            Acceptance::Flattened(hf) => {
                let proposed = current + delta;
                let ceiling = best + hf.ceiling_h;
                if hf.slope_kappa == 1.0 || (current <= ceiling && proposed <= ceiling) {
                    delta
                } else {
                    hf_transform(proposed, best, hf) - hf_transform(current, best, hf)
                }
            }
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Acceptance::Plain => "mc",
            Acceptance::Flattened(_) => "hf",
        }
    }
}

/// Lowest-scoring distinct states seen, best first.
#[derive(Debug, Clone)]
struct Archive {
    capacity: usize,
    entries: Vec<(f64, Assignment)>,
}

impl Archive {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: Vec::with_capacity(capacity + 1),
        }
    }

    fn offer(&mut self, score: f64, state: &Assignment) {
        if self.entries.len() == self.capacity {
            match self.entries.last() {
                Some((worst, _)) if score < *worst => {}
                _ => return,
            }
        }
        if self.entries.iter().any(|(_, a)| a == state) {
            return;
        }
        // Insert after equal scores so the earliest-found state ranks first.
        let at = self.entries.partition_point(|(s, _)| *s <= score);
        self.entries.insert(at, (score, state.clone()));
        self.entries.truncate(self.capacity);
    }
}

/// What one annealing trajectory produced.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    /// Lowest-scoring state of the trajectory.
    pub best: SolutionRecord,
    /// Up to `archive_size` distinct lowest-scoring states, best first.
    pub archive: Vec<SolutionRecord>,
}

/// Per-step record of a trajectory: the state after each step and its score.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub states: Vec<Assignment>,
    pub scores: Vec<f64>,
}

enum Move {
    Single {
        node: usize,
        choice: usize,
    },
    Swap {
        i: usize,
        ci: usize,
        j: usize,
        cj: usize,
    },
}

fn random_start(problem: &CfnProblem, rng: &mut ChaCha8Rng) -> Assignment {
    let span = (0..problem.node_count())
        .flat_map(|i| problem.labels(i).iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut used = vec![false; span];
    let mut free = Vec::new();
    let choices = (0..problem.node_count())
        .map(|i| {
            free.clear();
            free.extend((0..problem.choice_count(i)).filter(|&c| !used[problem.label(i, c)]));
            let c = if free.is_empty() {
                rng.random_range(0..problem.choice_count(i))
            } else {
                free[rng.random_range(0..free.len())]
            };
            used[problem.label(i, c)] = true;
            c
        })
        .collect();
    Assignment::new(choices)
}

fn propose(
    problem: &CfnProblem,
    state: &Assignment,
    swap_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Option<Move> {
    let n = problem.node_count();
    if n >= 2 && rng.random::<f64>() < swap_fraction {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (li, lj) = (problem.label(i, state[i]), problem.label(j, state[j]));
        if li != lj {
            if let (Some(ci), Some(cj)) = (
                problem.choice_for_label(i, lj),
                problem.choice_for_label(j, li),
            ) {
                return Some(Move::Swap { i, ci, j, cj });
            }
        }
    }
    let node = rng.random_range(0..n);
    let d = problem.choice_count(node);
    if d < 2 {
        return None;
    }
    let mut choice = rng.random_range(0..d - 1);
    if choice >= state[node] {
        choice += 1;
    }
    Some(Move::Single { node, choice })
}

fn anneal(
    problem: &CfnProblem,
    config: &McConfig,
    rule: Acceptance,
    mut observe: impl FnMut(&Assignment, f64),
) -> AnnealOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let steps = config.schedule.steps;
    let tag = rule.tag();
    let finish = |best: Assignment, archive: Archive| {
        let best = SolutionRecord::new(problem, best, tag, config.seed, steps);
        let archive = archive
            .entries
            .into_iter()
            .map(|(_, a)| SolutionRecord::new(problem, a, tag, config.seed, steps))
            .collect();
        AnnealOutcome { best, archive }
    };

    let mut state = random_start(problem, &mut rng);
    let mut current = problem.evaluate(&state);
    let mut best = current;
    let mut best_state = state.clone();
    let mut archive = Archive::new(config.archive_size.max(1));
    archive.offer(current, &state);
    if problem.node_count() == 0 {
        return finish(best_state, archive);
    }

    for step in 0..steps {
        let temperature = config.schedule.temperature(step);
        if let Some(mv) = propose(problem, &state, config.swap_move_fraction, &mut rng) {
            let delta = match mv {
                Move::Single { node, choice } => problem.delta_evaluate(&state, node, choice),
                Move::Swap { i, ci, j, cj } => {
                    let old = state.0[i];
                    let first = problem.delta_evaluate(&state, i, ci);
                    state.0[i] = ci;
                    let second = problem.delta_evaluate(&state, j, cj);
                    state.0[i] = old;
                    first + second
                }
            };
            let effective = rule.effective_delta(current, delta, best);
            let accept = effective <= 0.0 || rng.random::<f64>() < (-effective / temperature).exp();
            if accept {
                match mv {
                    Move::Single { node, choice } => state.0[node] = choice,
                    Move::Swap { i, ci, j, cj } => {
                        state.0[i] = ci;
                        state.0[j] = cj;
                    }
                }
                current += delta;
                if current < best {
                    best = current;
                    best_state.clone_from(&state);
                }
                archive.offer(current, &state);
            }
        }
        observe(&state, current);
    }
    finish(best_state, archive)
}

fn traced(problem: &CfnProblem, config: &McConfig, rule: Acceptance) -> (AnnealOutcome, Trace) {
    let mut trace = Trace::default();
    let outcome = anneal(problem, config, rule, |s, e| {
        trace.states.push(s.clone());
        trace.scores.push(e);
    });
    (outcome, trace)
}

/// Annealed Metropolis Monte Carlo; returns the best state of the trajectory.
pub fn mc_solve(problem: &CfnProblem, config: &McConfig) -> SolutionRecord {
    mc_run(problem, config).best
}

/// Like [`mc_solve`], also returning the trajectory's archive of low states.
pub fn mc_run(problem: &CfnProblem, config: &McConfig) -> AnnealOutcome {
    anneal(problem, config, Acceptance::Plain, |_, _| {})
}

pub fn mc_trace(problem: &CfnProblem, config: &McConfig) -> (AnnealOutcome, Trace) {
    traced(problem, config, Acceptance::Plain)
}

/// Hill-flattening Monte Carlo: acceptance sees `hf_transform`-ed scores
/// relative to the best raw score so far. The reported score is raw.
pub fn hf_solve(problem: &CfnProblem, config: &McConfig, hf: &HfConfig) -> SolutionRecord {
    hf_run(problem, config, hf).best
}

pub fn hf_run(problem: &CfnProblem, config: &McConfig, hf: &HfConfig) -> AnnealOutcome {
    anneal(problem, config, Acceptance::Flattened(*hf), |_, _| {})
}

pub fn hf_trace(problem: &CfnProblem, config: &McConfig, hf: &HfConfig) -> (AnnealOutcome, Trace) {
    traced(problem, config, Acceptance::Flattened(*hf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfn::CfnBuilder;

    #[test]
    fn transform_reference_points() {
        let hf = HfConfig::new(4.0, 0.1).unwrap();
        assert_eq!(hf_transform(-3.0, -3.0, &hf), -3.0);
        assert_eq!(hf_transform(1.0, -3.0, &hf), 1.0);
        let h = hf.ceiling_h;
        assert!((hf_transform(-3.0 + 2.0 * h, -3.0, &hf) - (-3.0 + 1.1 * h)).abs() < 1e-12);
    }

    #[test]
    fn schedule_endpoints() {
        let s = AnnealSchedule::new(10.0, 0.1, 101).unwrap();
        assert_eq!(s.temperature(0), 10.0);
        assert!((s.temperature(100) - 0.1).abs() < 1e-12);
        assert!((s.temperature(50) - 1.0).abs() < 1e-12);
        assert!(AnnealSchedule::new(0.1, 1.0, 10).is_err());
        assert!(AnnealSchedule::new(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn single_node_finds_minimum() {
        let mut b = CfnBuilder::with_choice_counts(&[5]);
        for (c, v) in [3.0, 1.0, -2.0, 4.0, 0.5].into_iter().enumerate() {
            b.add_one_node(0, c, v);
        }
        let p = b.build().unwrap();
        let cfg = McConfig {
            schedule: AnnealSchedule::new(0.01, 0.01, 5).unwrap(),
            swap_move_fraction: 0.0,
            seed: 1,
            archive_size: 1,
        };
        let r = mc_solve(&p, &cfg);
        assert_eq!(r.score, -2.0);
    }

    #[test]
    fn archive_keeps_distinct_best_first() {
        let mut a = Archive::new(2);
        a.offer(3.0, &Assignment::new(vec![0]));
        a.offer(1.0, &Assignment::new(vec![1]));
        a.offer(1.0, &Assignment::new(vec![1]));
        a.offer(2.0, &Assignment::new(vec![2]));
        let scores: Vec<f64> = a.entries.iter().map(|e| e.0).collect();
        assert_eq!(scores, vec![1.0, 2.0]);
    }

    #[test]
    fn empty_problem() {
        let p = CfnBuilder::with_choice_counts(&[]).build().unwrap();
        let cfg = McConfig::for_problem(&p, 10, 0);
        assert_eq!(mc_solve(&p, &cfg).score, 0.0);
    }
}
