//! Solver specifications, the problems x solvers benchmark matrix, and its
//! TSV form.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::cfn::{Assignment, CfnProblem, SolutionRecord};
use crate::constraint::{compile_cfn, CompileError};
use crate::model::SeatingProblem;
use crate::qubo::{
    self, AnnealingSampler, Encoding, QuboSampler, QuboSolveOptions, DEFAULT_SWEEPS,
};
use crate::solvers::{
    brute_force_solve, run_replicates, AnnealSchedule, BruteForceMode, ClassicalSolver, HfConfig,
    McConfig, SolverError, DEFAULT_SWAP_FRACTION,
};

pub const REPORT_FORMAT_VERSION: u32 = 1;
pub const NO_VALID_SOLUTION: &str = "no_valid_solution";
pub const SKIPPED: &str = "skipped";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Brute,
    Mc,
    Hf,
    Qubo(Encoding),
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Brute => "brute",
            SolverKind::Mc => "mc",
            SolverKind::Hf => "hf",
            SolverKind::Qubo(Encoding::OneHot) => "qubo-oh",
            SolverKind::Qubo(Encoding::DomainWall) => "qubo-dw",
            SolverKind::Qubo(Encoding::ApproxBinary) => "qubo-ab",
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" => Ok(SolverKind::Brute),
            "mc" => Ok(SolverKind::Mc),
            "hf" => Ok(SolverKind::Hf),
            _ => s
                .strip_prefix("qubo-")
                .and_then(|e| e.parse().ok())
                .map(SolverKind::Qubo)
                .ok_or_else(|| format!("unknown solver `{s}`")),
        }
    }
}

/// Everything needed to run one solver on one problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub steps: u64,
    pub shots: u64,
    pub replicates: usize,
    pub sweeps: usize,
    pub swap_fraction: Option<f64>,
    pub hf_ceiling: Option<f64>,
    pub hf_kappa: Option<f64>,
    pub constraint_strength: Option<f64>,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            steps: 1_000,
            shots: 1_000,
            replicates: 1,
            sweeps: DEFAULT_SWEEPS,
            swap_fraction: None,
            hf_ceiling: None,
            hf_kappa: None,
            constraint_strength: None,
        }
    }

    pub fn steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn replicates(mut self, r: usize) -> Self {
        self.replicates = r;
        self
    }

    /// Short label such as `mc-30k` or `qubo-ab-1k`.
    pub fn label(&self) -> String {
        let count = match self.kind {
            SolverKind::Brute => return "brute".to_string(),
            SolverKind::Mc | SolverKind::Hf => self.steps,
            SolverKind::Qubo(_) => self.shots,
        };
        let mut label = format!("{}-{}", self.kind.name(), compact_count(count));
        if self.replicates > 1 {
            label.push_str(&format!("x{}", self.replicates));
        }
        label
    }

    fn mc_config(&self, problem: &CfnProblem, seed: u64) -> McConfig {
        McConfig {
            swap_move_fraction: self.swap_fraction.unwrap_or(DEFAULT_SWAP_FRACTION),
            ..McConfig::for_problem(problem, self.steps, seed)
        }
    }

    fn hf_config(&self, schedule: &AnnealSchedule) -> HfConfig {
        let default = HfConfig::for_schedule(schedule);
        HfConfig {
            ceiling_h: self.hf_ceiling.unwrap_or(default.ceiling_h),
            slope_kappa: self.hf_kappa.unwrap_or(default.slope_kappa),
        }
    }
}

fn compact_count(n: u64) -> String {
    match n {
        n if n >= 1_000_000 && n % 1_000_000 == 0 => format!("{}M", n / 1_000_000),
        n if n >= 1_000 && n % 1_000 == 0 => format!("{}k", n / 1_000),
        n => n.to_string(),
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    let (digits, scale) = match s.as_bytes().last() {
        Some(b'k') => (&s[..s.len() - 1], 1_000),
        Some(b'M') => (&s[..s.len() - 1], 1_000_000),
        _ => (s, 1),
    };
    digits
        .parse::<u64>()
        .map(|d| d * scale)
        .map_err(|_| format!("bad count `{s}`"))
}

/// `<solver>[:<count>]`, e.g. `mc:30k`, `qubo-ab:1000`, `brute`. The count is
/// steps for trajectory solvers and shots for QUBO solvers.
impl FromStr for SolverSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, count) = match s.split_once(':') {
            Some((k, c)) => (k, Some(parse_count(c)?)),
            None => (s, None),
        };
        let mut spec = SolverSpec::new(kind.parse()?);
        if let Some(c) = count {
            match spec.kind {
                SolverKind::Brute => return Err("brute takes no count".into()),
                SolverKind::Mc | SolverKind::Hf => spec.steps = c,
                SolverKind::Qubo(_) => spec.shots = c,
            }
        }
        Ok(spec)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] crate::solvers::SolverError),
    #[error(transparent)]
    Qubo(#[from] qubo::QuboError),
}

/// Result of running one solver on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    /// Best record, or `None` when a QUBO run decoded nothing.
    pub best: Option<SolutionRecord>,
    /// Fraction of shots that decoded, for QUBO solvers.
    pub valid_fraction: Option<f64>,
}

pub fn run_solver(
    problem: &CfnProblem,
    spec: &SolverSpec,
    seed: u64,
) -> Result<SolverRun, RunError> {
    run_solver_with(
        problem,
        spec,
        seed,
        &AnnealingSampler::with_sweeps(spec.sweeps),
    )
}

/// [`run_solver`] with an explicit QUBO sampler backend.
pub fn run_solver_with(
    problem: &CfnProblem,
    spec: &SolverSpec,
    seed: u64,
    sampler: &dyn QuboSampler,
) -> Result<SolverRun, RunError> {
    if spec.replicates == 0 {
        return Err(SolverError::BadConfig("at least one replicate is required".into()).into());
    }
    let classical = |solver: ClassicalSolver| -> Result<SolverRun, RunError> {
        let report = run_replicates(problem, &solver, spec.replicates, seed)?;
        Ok(SolverRun {
            best: Some(report.best),
            valid_fraction: None,
        })
    };
    match spec.kind {
        SolverKind::Brute => {
            let result = brute_force_solve(problem, BruteForceMode::PermutationsOnly)?;
            Ok(SolverRun {
                best: result.solutions.into_iter().next(),
                valid_fraction: None,
            })
        }
        SolverKind::Mc => classical(ClassicalSolver::Mc(spec.mc_config(problem, seed))),
        SolverKind::Hf => {
            let mc = spec.mc_config(problem, seed);
            let hf = spec.hf_config(&mc.schedule);
            HfConfig::new(hf.ceiling_h, hf.slope_kappa)?;
            classical(ClassicalSolver::Hf(mc, hf))
        }
        SolverKind::Qubo(encoding) => {
            let mut best: Option<SolutionRecord> = None;
            let (mut valid, mut total) = (0u64, 0u64);
            for r in 0..spec.replicates as u64 {
                let out = qubo::solve_via_qubo_with(
                    problem,
                    &QuboSolveOptions {
                        encoding,
                        shots: spec.shots,
                        seed: seed.wrapping_add(r),
                        constraint_strength: spec.constraint_strength,
                        sampler,
                    },
                )?;
                valid += out.valid_shots;
                total += out.valid_shots + out.invalid_shots;
                if let Some(b) = out.best {
                    if best.as_ref().is_none_or(|cur| b.score < cur.score) {
                        best = Some(b);
                    }
                }
            }
            Ok(SolverRun {
                best,
                valid_fraction: Some(if total == 0 {
                    0.0
                } else {
                    valid as f64 / total as f64
                }),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellResult {
    Solved {
        score: f64,
        overlap_count: usize,
        assignment: Assignment,
    },
    NoValidSolution,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub solver: String,
    pub problem: String,
    pub result: CellResult,
    pub wall_time_s: f64,
    pub valid_fraction: Option<f64>,
}

impl BenchmarkRow {
    pub fn best_score(&self) -> Option<f64> {
        match self.result {
            CellResult::Solved { score, .. } => Some(score),
            _ => None,
        }
    }

    pub fn overlap_count(&self) -> Option<usize> {
        match self.result {
            CellResult::Solved { overlap_count, .. } => Some(overlap_count),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub format_version: u32,
    pub rows: Vec<BenchmarkRow>,
}

impl Default for BenchmarkReport {
    fn default() -> Self {
        Self {
            format_version: REPORT_FORMAT_VERSION,
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReportError {
    #[error("problem `{name}` does not compile: {source}")]
    Compile { name: String, source: CompileError },
    #[error("report line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Run every solver on every problem. Each cell uses `seed`; cells that
/// cannot run (for example a brute-force space that is too large) are
/// marked skipped instead of aborting the run.
pub fn run_benchmark(
    problems: &[(String, SeatingProblem)],
    solvers: &[SolverSpec],
    seed: u64,
) -> Result<BenchmarkReport, ReportError> {
    run_benchmark_with(problems, solvers, seed, None)
}

pub fn run_benchmark_with(
    problems: &[(String, SeatingProblem)],
    solvers: &[SolverSpec],
    seed: u64,
    sampler: Option<&dyn QuboSampler>,
) -> Result<BenchmarkReport, ReportError> {
    let compiled = problems
        .iter()
        .map(|(name, p)| {
            compile_cfn(p)
                .map(|(cfn, _)| cfn)
                .map_err(|source| ReportError::Compile {
                    name: name.clone(),
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = BenchmarkReport::default();
    for spec in solvers {
        let default_sampler = AnnealingSampler::with_sweeps(spec.sweeps);
        let sampler = sampler.unwrap_or(&default_sampler);
        for ((name, _), cfn) in problems.iter().zip(&compiled) {
            let start = Instant::now();
            let run = run_solver_with(cfn, spec, seed, sampler);
            let wall_time_s = start.elapsed().as_secs_f64();
            let (result, valid_fraction) = match run {
                Ok(SolverRun {
                    best: Some(rec),
                    valid_fraction,
                }) => (
                    CellResult::Solved {
                        score: rec.score,
                        overlap_count: rec.overlap_count,
                        assignment: rec.assignment,
                    },
                    valid_fraction,
                ),
                Ok(SolverRun {
                    best: None,
                    valid_fraction,
                }) => (CellResult::NoValidSolution, valid_fraction),
                Err(_) => (CellResult::Skipped, None),
            };
            report.rows.push(BenchmarkRow {
                solver: spec.label(),
                problem: name.clone(),
                result,
                wall_time_s,
                valid_fraction,
            });
        }
    }
    Ok(report)
}

const COLUMNS: [&str; 7] = [
    "solver",
    "problem",
    "best_score",
    "overlap_count",
    "wall_time_s",
    "valid_fraction",
    "assignment",
];

impl BenchmarkReport {
    /// Check every solved row's score and overlap count against its stored assignment.
    pub fn verify(&self, problems: &[(String, CfnProblem)]) -> Result<(), String> {
        for row in &self.rows {
            let CellResult::Solved {
                score,
                overlap_count,
                assignment,
            } = &row.result
            else {
                continue;
            };
            let (_, cfn) = problems
                .iter()
                .find(|(n, _)| *n == row.problem)
                .ok_or_else(|| format!("unknown problem `{}`", row.problem))?;
            cfn.check(assignment).map_err(|e| e.to_string())?;
            let expected = cfn.evaluate(assignment);
            if (expected - score).abs() > 1e-9 * expected.abs().max(1.0) {
                return Err(format!(
                    "{}/{}: score {score} != {expected}",
                    row.solver, row.problem
                ));
            }
            if cfn.count_overlaps(assignment) != *overlap_count {
                return Err(format!(
                    "{}/{}: overlap count mismatch",
                    row.solver, row.problem
                ));
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "# format_version {}\n{}\n",
            self.format_version,
            COLUMNS.join("\t")
        );
        for row in &self.rows {
            let fraction = row
                .valid_fraction
                .map_or("-".to_string(), |f| format!("{f:?}"));
            let (score, overlaps, assignment) = match &row.result {
                CellResult::Solved {
                    score,
                    overlap_count,
                    assignment,
                } => (
                    format!("{score:?}"),
                    overlap_count.to_string(),
                    assignment
                        .choices()
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                ),
                CellResult::NoValidSolution => (NO_VALID_SOLUTION.into(), "-".into(), "-".into()),
                CellResult::Skipped => (SKIPPED.into(), "-".into(), "-".into()),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:?}\t{}\t{}\n",
                row.solver, row.problem, score, overlaps, row.wall_time_s, fraction, assignment
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, ReportError> {
        let err = |line: usize, message: String| ReportError::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut format_version = REPORT_FORMAT_VERSION;
        let mut header_seen = false;
        let mut rows = Vec::new();
        for (n, line) in lines.by_ref() {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("format_version") {
                    format_version = v
                        .trim()
                        .parse()
                        .map_err(|_| err(n, "bad format version".into()))?;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !header_seen {
                if fields != COLUMNS {
                    return Err(err(n, "unexpected header row".into()));
                }
                header_seen = true;
                continue;
            }
            if fields.len() != COLUMNS.len() {
                return Err(err(
                    n,
                    format!("expected {} fields, found {}", COLUMNS.len(), fields.len()),
                ));
            }
            let num = |s: &str, what: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(n, format!("bad {what} `{s}`")))
            };
            let result = match fields[2] {
                NO_VALID_SOLUTION => CellResult::NoValidSolution,
                SKIPPED => CellResult::Skipped,
                s => CellResult::Solved {
                    score: num(s, "score")?,
                    overlap_count: fields[3]
                        .parse()
                        .map_err(|_| err(n, format!("bad overlap count `{}`", fields[3])))?,
                    assignment: Assignment::new(if fields[6].is_empty() {
                        Vec::new()
                    } else {
                        fields[6]
                            .split(',')
                            .map(|c| {
                                c.parse()
                                    .map_err(|_| err(n, format!("bad assignment `{}`", fields[6])))
                            })
                            .collect::<Result<_, _>>()?
                    }),
                },
            };
            rows.push(BenchmarkRow {
                solver: fields[0].to_string(),
                problem: fields[1].to_string(),
                result,
                wall_time_s: num(fields[4], "wall time")?,
                valid_fraction: match fields[5] {
                    "-" => None,
                    s => Some(num(s, "valid fraction")?),
                },
            });
        }
        if !header_seen {
            return Err(err(0, "missing header row".into()));
        }
        Ok(Self {
            format_version,
            rows,
        })
    }
}

impl fmt::Display for BenchmarkReport {
    /// Table-1 style: `score(overlaps)` per cell, one line per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cell = match &row.result {
                CellResult::Solved {
                    score,
                    overlap_count,
                    ..
                } => format!("{score:.1}({overlap_count})"),
                CellResult::NoValidSolution => "NVS".into(),
                CellResult::Skipped => "---".into(),
            };
            write!(f, "{:<14} {:<8} {:>14}", row.solver, row.problem, cell)?;
            if let Some(v) = row.valid_fraction {
                write!(f, "  valid={v:.3}")?;
            }
            writeln!(f, "  {:.3}s", row.wall_time_s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let s: SolverSpec = "mc:30k".parse().unwrap();
        assert_eq!((s.kind, s.steps), (SolverKind::Mc, 30_000));
        let s: SolverSpec = "qubo-ab:1000".parse().unwrap();
        assert_eq!(
            (s.kind, s.shots),
            (SolverKind::Qubo(Encoding::ApproxBinary), 1000)
        );
        assert_eq!(s.label(), "qubo-ab-1k");
        assert!("brute:10".parse::<SolverSpec>().is_err());
        assert!("sa".parse::<SolverSpec>().is_err());
        assert_eq!("hf:1M".parse::<SolverSpec>().unwrap().label(), "hf-1M");
    }

    #[test]
    fn empty_solver_list() {
        let p = crate::io::builtin_problem(crate::io::Builtin::Prob1);
        let r = run_benchmark(&[("prob1".into(), p)], &[], 0).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(BenchmarkReport::from_tsv(&r.to_tsv()).unwrap(), r);
    }

    #[test]
    fn markers_round_trip() {
        let r = BenchmarkReport {
            format_version: 1,
            rows: vec![
                BenchmarkRow {
                    solver: "qubo-oh-1k".into(),
                    problem: "prob1".into(),
                    result: CellResult::NoValidSolution,
                    wall_time_s: 0.25,
                    valid_fraction: Some(0.0),
                },
                BenchmarkRow {
                    solver: "brute".into(),
                    problem: "prob5".into(),
                    result: CellResult::Skipped,
                    wall_time_s: 1e-6,
                    valid_fraction: None,
                },
            ],
        };
        let tsv = r.to_tsv();
        assert!(tsv.contains("no_valid_solution") && tsv.contains("skipped"));
        assert_eq!(BenchmarkReport::from_tsv(&tsv).unwrap(), r);
    }
}
