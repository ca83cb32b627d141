//! Pairwise-decomposable cost function networks.
//!
//! A problem has `N` nodes; node `i` picks one of `D_i` choices, each choice
//! carrying a label (for seating problems, the global seat index). The score
//! of an assignment is
//!
//! ```text
//! offset + sum_i alpha_i(s_i) + sum_{i<j} beta_ij(s_i, s_j) + p_overlap * #{i<j : label(s_i) == label(s_j)}
//! ```
//!
//! The overlap term is kept implicit: it touches every pair of nodes, so
//! materialising it would make every pair block dense.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfnError {
    #[error("node {0} has no choices")]
    NoChoices(usize),
    #[error("node index {node} out of range ({count} nodes)")]
    NodeOutOfRange { node: usize, count: usize },
    #[error("choice {choice} out of range for node {node} ({count} choices)")]
    ChoiceOutOfRange {
        node: usize,
        choice: usize,
        count: usize,
    },
    #[error("pair ({0}, {0}) is not a pair of distinct nodes")]
    SelfPair(usize),
    #[error("non-finite score term {0}")]
    NonFinite(f64),
    #[error("overlap penalty must be positive, got {0}")]
    BadOverlapPenalty(f64),
}

/// Dense `rows x cols` score table for one node pair, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBlock {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PairBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for a in 0..rows {
            for b in 0..cols {
                data.push(f(a, b));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }

    #[inline]
    pub fn get_mut(&mut self, a: usize, b: usize) -> &mut f64 {
        &mut self.data[a * self.cols + b]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |a, b| self.get(b, a))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn add_assign(&mut self, other: &PairBlock) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y;
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// One choice index per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn new(choices: Vec<usize>) -> Self {
        Self(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Assignment {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy)]
struct Neighbour {
    other: usize,
    block: usize,
    /// true when this node indexes the rows of the block.
    is_row: bool,
}

#[derive(Debug, Clone)]
pub struct CfnProblem {
    labels: Vec<Vec<usize>>,
    one_node: Vec<Vec<f64>>,
    pair_keys: Vec<(usize, usize)>,
    pair_blocks: Vec<PairBlock>,
    neighbours: Vec<Vec<Neighbour>>,
    constant_offset: f64,
    overlap_penalty: Option<f64>,
    reserved_labels: BTreeSet<usize>,
    /// label -> choice index, per node; `usize::MAX` where the label is not allowed.
    choice_by_label: Vec<Vec<usize>>,
}

impl CfnProblem {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn choice_count(&self, node: usize) -> usize {
        self.labels[node].len()
    }

    pub fn choice_counts(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    /// Labels (global seat indices) of a node's choices.
    pub fn labels(&self, node: usize) -> &[usize] {
        &self.labels[node]
    }

    #[inline]
    pub fn label(&self, node: usize, choice: usize) -> usize {
        self.labels[node][choice]
    }

    /// Choice of `node` that carries `label`, if any.
    #[inline]
    pub fn choice_for_label(&self, node: usize, label: usize) -> Option<usize> {
        self.choice_by_label[node]
            .get(label)
            .copied()
            .filter(|&c| c != usize::MAX)
    }

    pub fn one_node(&self, node: usize) -> &[f64] {
        &self.one_node[node]
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    pub fn overlap_penalty(&self) -> Option<f64> {
        self.overlap_penalty
    }

    /// Explicitly stored pair blocks, keyed `(i, j)` with `i < j`.
    pub fn pair_blocks(&self) -> impl Iterator<Item = ((usize, usize), &PairBlock)> {
        self.pair_keys.iter().copied().zip(&self.pair_blocks)
    }

    pub fn pair_block(&self, i: usize, j: usize) -> Option<&PairBlock> {
        let key = (i.min(j), i.max(j));
        self.pair_keys
            .binary_search(&key)
            .ok()
            .map(|k| &self.pair_blocks[k])
    }

    /// Two-node score for choices `a` of `i` and `b` of `j`, including the
    /// implicit overlap term.
    pub fn pair_value(&self, i: usize, a: usize, j: usize, b: usize) -> f64 {
        let mut v = match self.pair_block(i, j) {
            Some(block) if i < j => block.get(a, b),
            Some(block) => block.get(b, a),
            None => 0.0,
        };
        if let Some(p) = self.overlap_penalty {
            if self.labels[i][a] == self.labels[j][b] {
                v += p;
            }
        }
        v
    }

    /// Full `D_i x D_j` block for `i < j` including the overlap term, or
    /// `None` when every entry is zero.
    pub fn materialized_pair(&self, i: usize, j: usize) -> Option<PairBlock> {
        debug_assert!(i < j);
        let mut block = self
            .pair_block(i, j)
            .cloned()
            .unwrap_or_else(|| PairBlock::zeros(self.choice_count(i), self.choice_count(j)));
        if let Some(p) = self.overlap_penalty {
            for (a, &la) in self.labels[i].iter().enumerate() {
                if let Some(b) = self.choice_for_label(j, la) {
                    *block.get_mut(a, b) += p;
                }
            }
        }
        (!block.is_zero()).then_some(block)
    }

    pub fn is_valid(&self, a: &Assignment) -> bool {
        a.len() == self.node_count() && a.0.iter().zip(&self.labels).all(|(&c, l)| c < l.len())
    }

    pub fn check(&self, a: &Assignment) -> Result<(), CfnError> {
        if a.len() != self.node_count() {
            return Err(CfnError::NodeOutOfRange {
                node: a.len(),
                count: self.node_count(),
            });
        }
        for (node, (&choice, l)) in a.0.iter().zip(&self.labels).enumerate() {
            if choice >= l.len() {
                return Err(CfnError::ChoiceOutOfRange {
                    node,
                    choice,
                    count: l.len(),
                });
            }
        }
        Ok(())
    }

    /// Total score of an assignment.
    pub fn evaluate(&self, a: &Assignment) -> f64 {
        debug_assert!(self.is_valid(a));
        let s = &a.0;
        let mut total = self.constant_offset;
        for (i, &c) in s.iter().enumerate() {
            total += self.one_node[i][c];
        }
        for (&(i, j), block) in self.pair_keys.iter().zip(&self.pair_blocks) {
            total += block.get(s[i], s[j]);
        }
        if let Some(p) = self.overlap_penalty {
            total += p * self.node_overlaps(a) as f64;
        }
        total
    }

    /// Score change from setting `node` to `new_choice`, touching only the
    /// terms that involve `node`.
    pub fn delta_evaluate(&self, a: &Assignment, node: usize, new_choice: usize) -> f64 {
        let s = &a.0;
        let old = s[node];
        if old == new_choice {
            return 0.0;
        }
        let alpha = &self.one_node[node];
        let mut delta = alpha[new_choice] - alpha[old];
        for n in &self.neighbours[node] {
            let block = &self.pair_blocks[n.block];
            let o = s[n.other];
            delta += if n.is_row {
                block.get(new_choice, o) - block.get(old, o)
            } else {
                block.get(o, new_choice) - block.get(o, old)
            };
        }
        if let Some(p) = self.overlap_penalty {
            let old_label = self.labels[node][old];
            let new_label = self.labels[node][new_choice];
            let mut net = 0i64;
            for (j, &c) in s.iter().enumerate() {
                if j == node {
                    continue;
                }
                let l = self.labels[j][c];
                net += (l == new_label) as i64 - (l == old_label) as i64;
            }
            delta += p * net as f64;
        }
        delta
    }

    fn node_overlaps(&self, a: &Assignment) -> usize {
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, &c) in a.0.iter().enumerate() {
            *seen.entry(self.labels[i][c]).or_default() += 1;
        }
        seen.values().map(|&k| k * (k - 1) / 2).sum()
    }

    /// Number of unordered pairs sharing a label, counting nodes against each
    /// other and against reserved labels.
    pub fn count_overlaps(&self, a: &Assignment) -> usize {
        let reserved =
            a.0.iter()
                .enumerate()
                .filter(|&(i, &c)| self.reserved_labels.contains(&self.labels[i][c]))
                .count();
        self.node_overlaps(a) + reserved
    }

    /// Labels held by something outside the nodes, such as a fixed guest.
    /// Their scores are already in the one-node terms; they only affect
    /// [`count_overlaps`](Self::count_overlaps).
    pub fn reserved_labels(&self) -> &BTreeSet<usize> {
        &self.reserved_labels
    }

    /// Labels chosen by an assignment.
    pub fn chosen_labels(&self, a: &Assignment) -> Vec<usize> {
        a.0.iter()
            .enumerate()
            .map(|(i, &c)| self.labels[i][c])
            .collect()
    }

    /// Largest absolute two-node entry, counting the overlap penalty.
    pub fn max_abs_pair_value(&self) -> f64 {
        let explicit = self
            .pair_blocks
            .iter()
            .flat_map(|b| b.values())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        explicit.max(self.overlap_penalty.unwrap_or(0.0))
    }
}

/// Accumulates terms for a [`CfnProblem`]. Pair terms for the same node pair
/// are summed; pairs given as `(j, i)` are transposed into `(i, j)`.
#[derive(Debug, Clone)]
pub struct CfnBuilder {
    labels: Vec<Vec<usize>>,
    one_node: Vec<Vec<f64>>,
    pairs: BTreeMap<(usize, usize), PairBlock>,
    constant_offset: f64,
    overlap_penalty: Option<f64>,
    reserved_labels: BTreeSet<usize>,
}

impl CfnBuilder {
    /// Nodes with the given choice labels.
    pub fn new(labels: Vec<Vec<usize>>) -> Self {
        let one_node = labels.iter().map(|l| vec![0.0; l.len()]).collect();
        Self {
            labels,
            one_node,
            pairs: BTreeMap::new(),
            constant_offset: 0.0,
            overlap_penalty: None,
            reserved_labels: BTreeSet::new(),
        }
    }

    /// Nodes whose choices are labelled `0..D_i`.
    pub fn with_choice_counts(counts: &[usize]) -> Self {
        Self::new(counts.iter().map(|&d| (0..d).collect()).collect())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn choice_count(&self, node: usize) -> usize {
        self.labels[node].len()
    }

    pub fn labels(&self, node: usize) -> &[usize] {
        &self.labels[node]
    }

    pub fn add_constant(&mut self, v: f64) -> &mut Self {
        self.constant_offset += v;
        self
    }

    pub fn add_one_node(&mut self, node: usize, choice: usize, v: f64) -> &mut Self {
        self.one_node[node][choice] += v;
        self
    }

    pub fn add_two_node(&mut self, i: usize, a: usize, j: usize, b: usize, v: f64) -> &mut Self {
        assert_ne!(i, j, "two-node term on a single node");
        let (i, a, j, b) = if i < j { (i, a, j, b) } else { (j, b, i, a) };
        let (ri, cj) = (self.labels[i].len(), self.labels[j].len());
        *self
            .pairs
            .entry((i, j))
            .or_insert_with(|| PairBlock::zeros(ri, cj))
            .get_mut(a, b) += v;
        self
    }

    /// Add a whole block; `block` is indexed `[choice of i][choice of j]`.
    pub fn add_pair_block(&mut self, i: usize, j: usize, block: &PairBlock) -> &mut Self {
        assert_ne!(i, j, "two-node block on a single node");
        let (key, block) = if i < j {
            ((i, j), block.clone())
        } else {
            ((j, i), block.transpose())
        };
        assert_eq!(
            (block.rows(), block.cols()),
            (self.labels[key.0].len(), self.labels[key.1].len()),
            "block shape does not match choice counts"
        );
        match self.pairs.get_mut(&key) {
            Some(existing) => existing.add_assign(&block),
            None => {
                self.pairs.insert(key, block);
            }
        }
        self
    }

    /// Charge `p` for every pair of nodes whose choices share a label.
    pub fn overlap_penalty(&mut self, p: f64) -> &mut Self {
        self.overlap_penalty = Some(p);
        self
    }

    /// Mark `label` as taken outside the nodes.
    pub fn reserve_label(&mut self, label: usize) -> &mut Self {
        self.reserved_labels.insert(label);
        self
    }

    pub fn build(self) -> Result<CfnProblem, CfnError> {
        let n = self.labels.len();
        if let Some(i) = self.labels.iter().position(Vec::is_empty) {
            return Err(CfnError::NoChoices(i));
        }
        let finite = |v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CfnError::NonFinite(v))
            }
        };
        finite(self.constant_offset)?;
        for &v in self.one_node.iter().flatten() {
            finite(v)?;
        }
        if let Some(p) = self.overlap_penalty {
            if !(p > 0.0 && p.is_finite()) {
                return Err(CfnError::BadOverlapPenalty(p));
            }
        }

        let mut pair_keys = Vec::new();
        let mut pair_blocks = Vec::new();
        let mut neighbours = vec![Vec::new(); n];
        for ((i, j), block) in self.pairs {
            if j >= n {
                return Err(CfnError::NodeOutOfRange { node: j, count: n });
            }
            for &v in block.values() {
                finite(v)?;
            }
            if block.is_zero() {
                continue;
            }
            let idx = pair_blocks.len();
            neighbours[i].push(Neighbour {
                other: j,
                block: idx,
                is_row: true,
            });
            neighbours[j].push(Neighbour {
                other: i,
                block: idx,
                is_row: false,
            });
            pair_keys.push((i, j));
            pair_blocks.push(block);
        }

        let max_label = self.labels.iter().flatten().copied().max().unwrap_or(0);
        let choice_by_label = self
            .labels
            .iter()
            .map(|l| {
                let mut table = vec![usize::MAX; max_label + 1];
                for (c, &label) in l.iter().enumerate() {
                    if table[label] == usize::MAX {
                        table[label] = c;
                    }
                }
                table
            })
            .collect();

        Ok(CfnProblem {
            labels: self.labels,
            one_node: self.one_node,
            pair_keys,
            pair_blocks,
            neighbours,
            constant_offset: self.constant_offset,
            overlap_penalty: self.overlap_penalty,
            reserved_labels: self.reserved_labels,
            choice_by_label,
        })
    }
}

/// A scored assignment with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub assignment: Assignment,
    pub score: f64,
    pub overlap_count: usize,
    pub solver_tag: String,
    pub seed: u64,
    pub steps_or_shots: u64,
}

impl SolutionRecord {
    /// Scores `assignment` against `problem`; score and overlaps are never
    /// taken from the solver.
    pub fn new(
        problem: &CfnProblem,
        assignment: Assignment,
        solver_tag: impl Into<String>,
        seed: u64,
        steps_or_shots: u64,
    ) -> Self {
        let score = problem.evaluate(&assignment);
        let overlap_count = problem.count_overlaps(&assignment);
        Self {
            assignment,
            score,
            overlap_count,
            solver_tag: solver_tag.into(),
            seed,
            steps_or_shots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_problem_scores_zero() {
        let p = CfnBuilder::with_choice_counts(&[3, 3, 2]).build().unwrap();
        let a = Assignment::new(vec![2, 1, 0]);
        assert_eq!(p.evaluate(&a), 0.0);
        assert_eq!(p.delta_evaluate(&a, 0, 1), 0.0);
    }

    #[test]
    fn single_block_lookup() {
        let mut b = CfnBuilder::with_choice_counts(&[2, 2]);
        b.add_pair_block(
            0,
            1,
            &PairBlock::from_fn(2, 2, |a, c| (2 * a + c + 1) as f64),
        );
        let p = b.build().unwrap();
        assert_eq!(p.evaluate(&Assignment::new(vec![1, 0])), 3.0);
    }

    #[test]
    fn reversed_pair_is_transposed() {
        let mut b = CfnBuilder::with_choice_counts(&[2, 3]);
        b.add_two_node(1, 2, 0, 1, 4.0);
        let p = b.build().unwrap();
        assert_eq!(p.pair_block(0, 1).unwrap().get(1, 2), 4.0);
        assert_eq!(p.pair_value(1, 2, 0, 1), 4.0);
    }

    #[test]
    fn noop_move_has_zero_delta() {
        let mut b = CfnBuilder::with_choice_counts(&[2, 2]);
        b.add_two_node(0, 0, 1, 1, 5.0).overlap_penalty(10.0);
        let p = b.build().unwrap();
        let a = Assignment::new(vec![0, 1]);
        assert_eq!(p.delta_evaluate(&a, 1, 1), 0.0);
    }

    #[test]
    fn overlap_counting_is_pairwise() {
        let p = CfnBuilder::with_choice_counts(&[3, 3, 3]).build().unwrap();
        assert_eq!(p.count_overlaps(&Assignment::new(vec![0, 0, 0])), 3);
        assert_eq!(p.count_overlaps(&Assignment::new(vec![0, 1, 2])), 0);
        assert_eq!(p.count_overlaps(&Assignment::new(vec![1, 1, 2])), 1);
    }

    #[test]
    fn implicit_overlap_matches_materialized() {
        let mut b = CfnBuilder::new(vec![vec![0, 1, 2], vec![2, 3]]);
        b.overlap_penalty(7.0).add_two_node(0, 0, 1, 1, 1.5);
        let p = b.build().unwrap();
        let m = p.materialized_pair(0, 1).unwrap();
        assert_eq!(m.get(2, 0), 7.0);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(p.evaluate(&Assignment::new(vec![2, 0])), 7.0);
        assert_eq!(p.delta_evaluate(&Assignment::new(vec![1, 0]), 0, 2), 7.0);
    }

    #[test]
    fn builder_rejects_bad_input() {
        assert_eq!(
            CfnBuilder::with_choice_counts(&[2, 0]).build().unwrap_err(),
            CfnError::NoChoices(1)
        );
        let mut b = CfnBuilder::with_choice_counts(&[2]);
        b.add_one_node(0, 0, f64::NAN);
        assert!(matches!(b.build(), Err(CfnError::NonFinite(_))));
        let mut b = CfnBuilder::with_choice_counts(&[2]);
        b.overlap_penalty(-1.0);
        assert!(matches!(b.build(), Err(CfnError::BadOverlapPenalty(_))));
    }

    #[test]
    fn zero_blocks_are_dropped() {
        let mut b = CfnBuilder::with_choice_counts(&[2, 2]);
        b.add_two_node(0, 0, 1, 0, 1.0)
            .add_two_node(0, 0, 1, 0, -1.0);
        let p = b.build().unwrap();
        assert_eq!(p.pair_blocks().count(), 0);
    }
}
