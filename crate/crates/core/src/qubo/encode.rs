use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::cfn::{Assignment, CfnProblem, PairBlock};

use super::fit::QuadraticFitter;
use super::problem::QuboProblem;
use super::QuboError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Encoding {
    OneHot,
    DomainWall,
    ApproxBinary,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [
        Encoding::OneHot,
        Encoding::DomainWall,
        Encoding::ApproxBinary,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Encoding::OneHot => "oh",
            Encoding::DomainWall => "dw",
            Encoding::ApproxBinary => "ab",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oh" | "one-hot" => Ok(Encoding::OneHot),
            "dw" | "domain-wall" => Ok(Encoding::DomainWall),
            "ab" | "approx-binary" => Ok(Encoding::ApproxBinary),
            _ => Err(format!("unknown encoding `{s}`")),
        }
    }
}

/// Bits used by a node with `choices` choices.
pub fn bits_per_node(encoding: Encoding, choices: usize) -> usize {
    match encoding {
        Encoding::OneHot => choices,
        Encoding::DomainWall => choices.saturating_sub(1),
        Encoding::ApproxBinary => {
            if choices <= 1 {
                0
            } else {
                (usize::BITS - (choices - 1).leading_zeros()) as usize
            }
        }
    }
}

pub fn qubit_count(problem: &CfnProblem, encoding: Encoding) -> usize {
    (0..problem.node_count())
        .map(|i| bits_per_node(encoding, problem.choice_count(i)))
        .sum()
}

/// Where each node's bits live and how to read them.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMap {
    pub encoding: Encoding,
    pub ranges: Vec<Range<usize>>,
    pub choice_counts: Vec<usize>,
    /// Penalty weight of the validity constraint (one-hot and domain-wall).
    pub constraint_strength: Option<f64>,
}

impl EncodingMap {
    fn new(problem: &CfnProblem, encoding: Encoding, constraint_strength: Option<f64>) -> Self {
        let mut start = 0;
        let mut ranges = Vec::with_capacity(problem.node_count());
        for i in 0..problem.node_count() {
            let len = bits_per_node(encoding, problem.choice_count(i));
            ranges.push(start..start + len);
            start += len;
        }
        Self {
            encoding,
            ranges,
            choice_counts: problem.choice_counts(),
            constraint_strength,
        }
    }

    pub fn bit_count(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    /// The choice-`choice` indicator of `node` as an affine function of bits.
    /// Only defined for one-hot and domain-wall.
    fn indicator(&self, node: usize, choice: usize) -> Affine {
        let r = &self.ranges[node];
        match self.encoding {
            Encoding::OneHot => Affine {
                constant: 0.0,
                terms: vec![(r.start + choice, 1.0)],
            },
            Encoding::DomainWall => {
                // w_d - w_{d+1} with w_0 = 1 and w_D = 0; real bits are w_1..w_{D-1}.
                let d = self.choice_counts[node];
                let mut a = Affine::default();
                if choice == 0 {
                    a.constant = 1.0;
                } else {
                    a.terms.push((r.start + choice - 1, 1.0));
                }
                if choice + 1 < d {
                    a.terms.push((r.start + choice, -1.0));
                }
                a
            }
            Encoding::ApproxBinary => unreachable!("approximate binary has no affine indicators"),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Affine {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

fn add_scaled(q: &mut QuboProblem, a: &Affine, v: f64) {
    q.add_constant(v * a.constant);
    for &(bit, c) in &a.terms {
        q.add_linear(bit, v * c);
    }
}

fn add_product(q: &mut QuboProblem, a: &Affine, b: &Affine, v: f64) {
    q.add_constant(v * a.constant * b.constant);
    for &(bit, c) in &a.terms {
        q.add_linear(bit, v * c * b.constant);
    }
    for &(bit, c) in &b.terms {
        q.add_linear(bit, v * c * a.constant);
    }
    for &(x, cx) in &a.terms {
        for &(y, cy) in &b.terms {
            q.add_quadratic(x, y, v * cx * cy);
        }
    }
}

/// Every non-zero two-node block with the overlap term included, `(i, j, block)` with `i < j`.
fn all_pair_blocks(problem: &CfnProblem) -> Vec<(usize, usize, PairBlock)> {
    let n = problem.node_count();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| problem.materialized_pair(i, j).map(|b| (i, j, b)))
        .collect()
}

/// Twice the largest per-node sum of incident cost magnitudes, plus one.
///
/// No invalid string can then undercut a valid one by more than the
/// penalty it pays.
pub fn default_constraint_strength(problem: &CfnProblem) -> f64 {
    let mut incident: Vec<f64> = (0..problem.node_count())
        .map(|i| problem.one_node(i).iter().map(|v| v.abs()).sum())
        .collect();
    for (i, j, block) in all_pair_blocks(problem) {
        let total: f64 = block.values().iter().map(|v| v.abs()).sum();
        incident[i] += total;
        incident[j] += total;
    }
    2.0 * incident.into_iter().fold(0.0, f64::max) + 1.0
}

fn check_strength(lambda: f64) -> Result<(), QuboError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(QuboError::BadStrength(lambda))
    }
}

fn encode_affine(problem: &CfnProblem, map: EncodingMap) -> QuboProblem {
    let mut q = QuboProblem::new(map.bit_count());
    q.add_constant(problem.constant_offset());
    for i in 0..problem.node_count() {
        for (c, &v) in problem.one_node(i).iter().enumerate() {
            if v != 0.0 {
                add_scaled(&mut q, &map.indicator(i, c), v);
            }
        }
    }
    for (i, j, block) in all_pair_blocks(problem) {
        let rows: Vec<Affine> = (0..block.rows()).map(|a| map.indicator(i, a)).collect();
        let cols: Vec<Affine> = (0..block.cols()).map(|b| map.indicator(j, b)).collect();
        for (a, ra) in rows.iter().enumerate() {
            for (b, cb) in cols.iter().enumerate() {
                let v = block.get(a, b);
                if v != 0.0 {
                    add_product(&mut q, ra, cb, v);
                }
            }
        }
    }
    q
}

/// One bit per (node, choice); each node pays `lambda * (sum of its bits - 1)^2`.
pub fn encode_one_hot(
    problem: &CfnProblem,
    lambda: f64,
) -> Result<(QuboProblem, EncodingMap), QuboError> {
    check_strength(lambda)?;
    let map = EncodingMap::new(problem, Encoding::OneHot, Some(lambda));
    let mut q = encode_affine(problem, map.clone());
    for r in &map.ranges {
        q.add_constant(lambda);
        for x in r.clone() {
            q.add_linear(x, -lambda);
            for y in x + 1..r.end {
                q.add_quadratic(x, y, 2.0 * lambda);
            }
        }
    }
    q.prune();
    Ok((q, map))
}

/// `D_i - 1` bits per node read as a wall `1..10..0`; the choice is the
/// number of leading ones. Each `0 -> 1` step costs `lambda`.
pub fn encode_domain_wall(
    problem: &CfnProblem,
    lambda: f64,
) -> Result<(QuboProblem, EncodingMap), QuboError> {
    check_strength(lambda)?;
    let map = EncodingMap::new(problem, Encoding::DomainWall, Some(lambda));
    let mut q = encode_affine(problem, map.clone());
    for r in &map.ranges {
        for k in r.start..r.end.saturating_sub(1) {
            // lambda * w_{k+1} * (1 - w_k)
            q.add_linear(k + 1, lambda);
            q.add_quadratic(k, k + 1, -lambda);
        }
    }
    q.prune();
    Ok((q, map))
}

fn binary_choice(bits: &[bool], choices: usize) -> usize {
    let value = bits
        .iter()
        .enumerate()
        .fold(0usize, |acc, (k, &b)| acc | ((b as usize) << k));
    if choices == 0 {
        0
    } else {
        value % choices
    }
}

/// `ceil(log2 D_i)` bits per node, bit `k` weighted `2^k`; the code value
/// modulo `D_i` is the choice, so every string decodes. Each one-node table
/// and two-node block is fit by the closest quadratic function of the
/// involved bits. Returns the summed root-mean-square fit error.
pub fn encode_approx_binary(problem: &CfnProblem) -> (QuboProblem, EncodingMap, f64) {
    let map = EncodingMap::new(problem, Encoding::ApproxBinary, None);
    let mut q = QuboProblem::new(map.bit_count());
    q.add_constant(problem.constant_offset());
    let mut fitter = QuadraticFitter::default();
    let mut residual = 0.0;

    let decode_code = |node: usize, code: usize| code % map.choice_counts[node];

    for i in 0..problem.node_count() {
        let alpha = problem.one_node(i);
        if alpha.iter().all(|&v| v == 0.0) {
            continue;
        }
        let m = map.ranges[i].len();
        let targets: Vec<f64> = (0..1usize << m).map(|p| alpha[decode_code(i, p)]).collect();
        let fit = fitter.fit(m, &targets);
        residual += fit.rms;
        let bit = |k: usize| map.ranges[i].start + k;
        q.add_constant(fit.constant);
        for (k, &l) in fit.linear.iter().enumerate() {
            q.add_linear(bit(k), l);
        }
        for &((k, l), v) in &fit.pairs {
            q.add_quadratic(bit(k), bit(l), v);
        }
    }

    for (i, j, block) in all_pair_blocks(problem) {
        let (mi, mj) = (map.ranges[i].len(), map.ranges[j].len());
        let targets: Vec<f64> = (0..1usize << (mi + mj))
            .map(|p| {
                let ci = decode_code(i, p & ((1 << mi) - 1));
                let cj = decode_code(j, p >> mi);
                block.get(ci, cj)
            })
            .collect();
        let fit = fitter.fit(mi + mj, &targets);
        residual += fit.rms;
        let bit = |k: usize| {
            if k < mi {
                map.ranges[i].start + k
            } else {
                map.ranges[j].start + (k - mi)
            }
        };
        q.add_constant(fit.constant);
        for (k, &l) in fit.linear.iter().enumerate() {
            q.add_linear(bit(k), l);
        }
        for &((k, l), v) in &fit.pairs {
            q.add_quadratic(bit(k), bit(l), v);
        }
    }
    q.prune();
    (q, map, residual)
}

/// Encode with the given strength, or the problem's default for encodings that need one.
pub fn encode(
    problem: &CfnProblem,
    encoding: Encoding,
    constraint_strength: Option<f64>,
) -> Result<(QuboProblem, EncodingMap, Option<f64>), QuboError> {
    let lambda = || constraint_strength.unwrap_or_else(|| default_constraint_strength(problem));
    match encoding {
        Encoding::OneHot => encode_one_hot(problem, lambda()).map(|(q, m)| (q, m, None)),
        Encoding::DomainWall => encode_domain_wall(problem, lambda()).map(|(q, m)| (q, m, None)),
        Encoding::ApproxBinary => {
            let (q, m, r) = encode_approx_binary(problem);
            Ok((q, m, Some(r)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Valid(Assignment),
    Invalid,
}

impl Decoded {
    pub fn valid(self) -> Option<Assignment> {
        match self {
            Decoded::Valid(a) => Some(a),
            Decoded::Invalid => None,
        }
    }
}

pub fn decode_bits(map: &EncodingMap, bits: &[bool]) -> Result<Decoded, QuboError> {
    if bits.len() != map.bit_count() {
        return Err(QuboError::LengthMismatch {
            expected: map.bit_count(),
            actual: bits.len(),
        });
    }
    let mut choices = Vec::with_capacity(map.ranges.len());
    for (node, r) in map.ranges.iter().enumerate() {
        let node_bits = &bits[r.clone()];
        let choice = match map.encoding {
            Encoding::OneHot => {
                let mut hot = node_bits
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(k, _)| k);
                match (hot.next(), hot.next()) {
                    (Some(k), None) => k,
                    _ => return Ok(Decoded::Invalid),
                }
            }
            Encoding::DomainWall => {
                let ones = node_bits.iter().take_while(|&&b| b).count();
                if node_bits[ones..].iter().any(|&b| b) {
                    return Ok(Decoded::Invalid);
                }
                ones
            }
            Encoding::ApproxBinary => binary_choice(node_bits, map.choice_counts[node]),
        };
        choices.push(choice);
    }
    Ok(Decoded::Valid(Assignment::new(choices)))
}

/// The canonical bit string of an assignment under `map`.
pub fn encode_assignment(map: &EncodingMap, a: &Assignment) -> Vec<bool> {
    let mut bits = vec![false; map.bit_count()];
    for (node, r) in map.ranges.iter().enumerate() {
        let c = a[node];
        match map.encoding {
            Encoding::OneHot => bits[r.start + c] = true,
            Encoding::DomainWall => bits[r.start..r.start + c].fill(true),
            Encoding::ApproxBinary => {
                for (k, b) in bits[r.clone()].iter_mut().enumerate() {
                    *b = (c >> k) & 1 == 1;
                }
            }
        }
    }
    bits
}
