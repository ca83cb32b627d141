use std::collections::BTreeSet;

use crate::cfn::{Assignment, CfnProblem, SolutionRecord};

use super::encode::{decode_bits, encode, Encoding};
use super::sampler::{AnnealingSampler, QuboSampler};
use super::QuboError;

pub struct QuboSolveOptions<'a> {
    pub encoding: Encoding,
    pub shots: u64,
    pub seed: u64,
    /// Validity penalty for one-hot and domain-wall; problem default when `None`.
    pub constraint_strength: Option<f64>,
    pub sampler: &'a dyn QuboSampler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboSolveOutcome {
    pub encoding: Encoding,
    /// Best valid decode, scored by the CFN itself. `None` means no shot decoded.
    pub best: Option<SolutionRecord>,
    /// Distinct valid assignments, best first.
    pub valid_assignments: Vec<SolutionRecord>,
    pub valid_shots: u64,
    pub invalid_shots: u64,
    pub distinct_bitstrings: usize,
    pub qubit_count: usize,
    pub fit_residual: Option<f64>,
}

impl QuboSolveOutcome {
    pub fn no_valid_solution(&self) -> bool {
        self.best.is_none()
    }

    pub fn valid_fraction(&self) -> f64 {
        let total = self.valid_shots + self.invalid_shots;
        if total == 0 {
            0.0
        } else {
            self.valid_shots as f64 / total as f64
        }
    }
}

fn tag(encoding: Encoding) -> String {
    format!("qubo-{}", encoding.short_name())
}

/// Encode, sample, decode, and re-score every valid decode with the CFN.
pub fn solve_via_qubo_with(
    problem: &CfnProblem,
    options: &QuboSolveOptions<'_>,
) -> Result<QuboSolveOutcome, QuboError> {
    let (q, map, fit_residual) = encode(problem, options.encoding, options.constraint_strength)?;
    let samples = options.sampler.sample(&q, options.shots, options.seed)?;

    let mut valid_shots = 0;
    let mut invalid_shots = 0;
    let mut valid: BTreeSet<Assignment> = BTreeSet::new();
    for s in &samples {
        match decode_bits(&map, &s.bits)?.valid() {
            Some(a) => {
                valid_shots += s.multiplicity;
                valid.insert(a);
            }
            None => invalid_shots += s.multiplicity,
        }
    }
    let tag = tag(options.encoding);
    let mut valid_assignments: Vec<SolutionRecord> = valid
        .into_iter()
        .map(|a| SolutionRecord::new(problem, a, tag.clone(), options.seed, options.shots))
        .collect();
    valid_assignments.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.assignment.cmp(&b.assignment))
    });

    Ok(QuboSolveOutcome {
        encoding: options.encoding,
        best: valid_assignments.first().cloned(),
        valid_assignments,
        valid_shots,
        invalid_shots,
        distinct_bitstrings: samples.len(),
        qubit_count: map.bit_count(),
        fit_residual,
    })
}

/// [`solve_via_qubo_with`] using the classical annealing sampler and the
/// default constraint strength.
pub fn solve_via_qubo(
    problem: &CfnProblem,
    encoding: Encoding,
    shots: u64,
    seed: u64,
) -> Result<QuboSolveOutcome, QuboError> {
    let sampler = AnnealingSampler::default();
    solve_via_qubo_with(
        problem,
        &QuboSolveOptions {
            encoding,
            shots,
            seed,
            constraint_strength: None,
            sampler: &sampler,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{BitSample, QuboProblem};

    struct AllZeros;

    impl QuboSampler for AllZeros {
        fn name(&self) -> &str {
            "zeros"
        }
        fn sample(
            &self,
            q: &QuboProblem,
            shots: u64,
            _seed: u64,
        ) -> Result<Vec<BitSample>, QuboError> {
            let bits = vec![false; q.bit_count()];
            Ok(vec![BitSample {
                energy: q.energy(&bits),
                bits,
                multiplicity: shots,
            }])
        }
    }

    #[test]
    fn zero_valid_decodes_is_reported() {
        let p = crate::cfn::CfnBuilder::with_choice_counts(&[3, 3])
            .build()
            .unwrap();
        let out = solve_via_qubo_with(
            &p,
            &QuboSolveOptions {
                encoding: Encoding::OneHot,
                shots: 10,
                seed: 0,
                constraint_strength: None,
                sampler: &AllZeros,
            },
        )
        .unwrap();
        assert!(out.no_valid_solution());
        assert_eq!((out.valid_shots, out.invalid_shots), (0, 10));
        assert_eq!(out.valid_fraction(), 0.0);
    }
}
