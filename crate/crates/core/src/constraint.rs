//! Seating constraints and their compilation into a [`CfnProblem`].
//!
//! Free guests become CFN nodes whose choices are their allowed seats.
//! Terms involving a fixed guest are folded into one-node terms of the free
//! partner, or into the constant offset when both guests are fixed, so the
//! compiled score of any completion equals the score of the full seating.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cfn::{Assignment, CfnBuilder, CfnError, CfnProblem, PairBlock};
use crate::model::{Point, SeatingProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintKind {
    /// Applies when the two guests sit in neighbouring seats of one table.
    Adjacent,
    /// Applies when the two guests sit at the same table.
    SameTable,
    /// Gaussian in the distance between the two guests' seats, equal to the
    /// penalty at distance one.
    Proximity { lambda: f64 },
}

/// A two-guest constraint. Negative penalties are bonuses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub first: usize,
    pub second: usize,
    pub penalty: f64,
}

impl ConstraintSpec {
    pub fn adjacent(first: usize, second: usize, penalty: f64) -> Self {
        Self {
            kind: ConstraintKind::Adjacent,
            first,
            second,
            penalty,
        }
    }

    pub fn same_table(first: usize, second: usize, penalty: f64) -> Self {
        Self {
            kind: ConstraintKind::SameTable,
            first,
            second,
            penalty,
        }
    }

    pub fn proximity(first: usize, second: usize, penalty: f64, lambda: f64) -> Self {
        Self {
            kind: ConstraintKind::Proximity { lambda },
            first,
            second,
            penalty,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.first == self.second {
            return Err(format!("guest {} paired with itself", self.first));
        }
        if !self.penalty.is_finite() {
            return Err(format!("non-finite penalty {}", self.penalty));
        }
        if let ConstraintKind::Proximity { lambda } = self.kind {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(format!("proximity breadth must be positive, got {lambda}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("guest `{0}` has no seat left to take")]
    Infeasible(String),
    #[error(transparent)]
    Cfn(#[from] CfnError),
}

/// Gaussian proximity term, scaled so that it equals `penalty` at `distance == 1`.
pub fn gaussian_penalty(distance: f64, penalty: f64, lambda: f64) -> f64 {
    // p / exp(-1/l^2) * exp(-(d/l)^2), folded into one exponent so d = 1 is exact.
    penalty * ((1.0 - distance * distance) / (lambda * lambda)).exp()
}

/// `p` wherever the two nodes would share a seat.
pub fn build_overlap_block(penalty: f64, seats_i: &[usize], seats_j: &[usize]) -> PairBlock {
    PairBlock::from_fn(seats_i.len(), seats_j.len(), |a, b| {
        if seats_i[a] == seats_j[b] {
            penalty
        } else {
            0.0
        }
    })
}

/// `p` wherever the two seats form a pair in `seat_pairs` (unordered, stored `(lo, hi)`).
pub fn build_pair_block(
    penalty: f64,
    seat_pairs: &BTreeSet<(usize, usize)>,
    seats_i: &[usize],
    seats_j: &[usize],
) -> PairBlock {
    PairBlock::from_fn(seats_i.len(), seats_j.len(), |a, b| {
        let (x, y) = (seats_i[a], seats_j[b]);
        if seat_pairs.contains(&(x.min(y), x.max(y))) {
            penalty
        } else {
            0.0
        }
    })
}

pub fn build_proximity_block(
    penalty: f64,
    lambda: f64,
    positions: &[Point],
    seats_i: &[usize],
    seats_j: &[usize],
) -> PairBlock {
    PairBlock::from_fn(seats_i.len(), seats_j.len(), |a, b| {
        let d = positions[seats_i[a]].distance(positions[seats_j[b]]);
        gaussian_penalty(d, penalty, lambda)
    })
}

/// Correspondence between guests and compiled CFN nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeChoiceMap {
    /// Node of each guest; `None` for fixed guests.
    pub node_of_guest: Vec<Option<usize>>,
    /// Guest behind each node.
    pub guest_of_node: Vec<usize>,
    /// Allowed global seats per node, which are also the node's choice labels.
    pub allowed_seats: Vec<Vec<usize>>,
    /// Fixed guests and their seats.
    pub fixed: Vec<(usize, usize)>,
}

impl NodeChoiceMap {
    /// Global seat of every guest under `a`.
    pub fn full_seating(&self, a: &Assignment) -> Vec<usize> {
        let mut seating = vec![usize::MAX; self.node_of_guest.len()];
        for &(g, s) in &self.fixed {
            seating[g] = s;
        }
        for (node, &g) in self.guest_of_node.iter().enumerate() {
            seating[g] = self.allowed_seats[node][a[node]];
        }
        seating
    }

    /// Inverse of [`full_seating`](Self::full_seating); `None` when a free
    /// guest sits outside its allowed set or a fixed guest has moved.
    pub fn assignment_for(&self, seating: &[usize]) -> Option<Assignment> {
        if self.fixed.iter().any(|&(g, s)| seating.get(g) != Some(&s)) {
            return None;
        }
        self.guest_of_node
            .iter()
            .enumerate()
            .map(|(node, &g)| {
                let seat = *seating.get(g)?;
                self.allowed_seats[node].iter().position(|&s| s == seat)
            })
            .collect::<Option<Vec<_>>>()
            .map(Assignment::new)
    }
}

/// Seat-pair relations shared by every constraint of a problem.
struct SeatRelations {
    adjacent: BTreeSet<(usize, usize)>,
    same_table: BTreeSet<(usize, usize)>,
    positions: Vec<Point>,
}

impl SeatRelations {
    fn new(problem: &SeatingProblem) -> Self {
        Self {
            adjacent: problem.adjacent_seat_pairs(),
            same_table: problem.same_table_seat_pairs(),
            positions: problem.seats().iter().map(|s| s.position).collect(),
        }
    }

    fn block(&self, c: &ConstraintSpec, seats_i: &[usize], seats_j: &[usize]) -> PairBlock {
        match c.kind {
            ConstraintKind::Adjacent => {
                build_pair_block(c.penalty, &self.adjacent, seats_i, seats_j)
            }
            ConstraintKind::SameTable => {
                build_pair_block(c.penalty, &self.same_table, seats_i, seats_j)
            }
            ConstraintKind::Proximity { lambda } => {
                build_proximity_block(c.penalty, lambda, &self.positions, seats_i, seats_j)
            }
        }
    }
}

/// Compile a seating problem into a pairwise CFN over its free guests.
pub fn compile_cfn(problem: &SeatingProblem) -> Result<(CfnProblem, NodeChoiceMap), CompileError> {
    let guest_count = problem.guest_count();
    let fixed: Vec<(usize, usize)> = problem
        .fixed_assignments()
        .iter()
        .map(|(&g, &s)| (g, s))
        .collect();

    let mut node_of_guest = vec![None; guest_count];
    let mut guest_of_node = Vec::new();
    let mut allowed_seats = Vec::new();
    for (g, node) in node_of_guest.iter_mut().enumerate() {
        if problem.fixed_assignments().contains_key(&g) {
            continue;
        }
        let seats = problem.allowed_seats(g);
        if seats.is_empty() {
            return Err(CompileError::Infeasible(problem.guests()[g].id.clone()));
        }
        *node = Some(guest_of_node.len());
        guest_of_node.push(g);
        allowed_seats.push(seats);
    }

    let map = NodeChoiceMap {
        node_of_guest,
        guest_of_node,
        allowed_seats,
        fixed,
    };
    let relations = SeatRelations::new(problem);
    let p_overlap = problem.overlap_penalty();

    let mut builder = CfnBuilder::new(map.allowed_seats.clone());
    builder.overlap_penalty(p_overlap);

    // Overlap terms that involve fixed guests.
    for (k, &(_, s)) in map.fixed.iter().enumerate() {
        builder.reserve_label(s);
        for &(_, t) in &map.fixed[k + 1..] {
            if s == t {
                builder.add_constant(p_overlap);
            }
        }
        for (node, seats) in map.allowed_seats.iter().enumerate() {
            if let Some(choice) = seats.iter().position(|&x| x == s) {
                builder.add_one_node(node, choice, p_overlap);
            }
        }
    }

    for c in problem.constraints() {
        match (map.node_of_guest[c.first], map.node_of_guest[c.second]) {
            (Some(i), Some(j)) => {
                let block = relations.block(c, &map.allowed_seats[i], &map.allowed_seats[j]);
                builder.add_pair_block(i, j, &block);
            }
            (Some(node), None) | (None, Some(node)) => {
                let fixed_guest = if map.node_of_guest[c.first].is_none() {
                    c.first
                } else {
                    c.second
                };
                let seat = problem.fixed_assignments()[&fixed_guest];
                let block = relations.block(c, &map.allowed_seats[node], &[seat]);
                for choice in 0..block.rows() {
                    builder.add_one_node(node, choice, block.get(choice, 0));
                }
            }
            (None, None) => {
                let s = problem.fixed_assignments()[&c.first];
                let t = problem.fixed_assignments()[&c.second];
                builder.add_constant(relations.block(c, &[s], &[t]).get(0, 0));
            }
        }
    }

    Ok((builder.build()?, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Table;

    #[test]
    fn gaussian_reference_values() {
        assert_eq!(gaussian_penalty(1.0, 7.0, 2.5), 7.0);
        assert!((gaussian_penalty(0.0, 1.0, 1.0) - std::f64::consts::E).abs() < 1e-12);
        assert!((gaussian_penalty(2.0, 1.0, 1.0) - (-3.0f64).exp()).abs() < 1e-15);
        assert!(gaussian_penalty(0.3, -2.0, 1.7) < 0.0);
    }

    #[test]
    fn overlap_blocks() {
        let b = build_overlap_block(100.0, &[0, 1], &[0, 1]);
        assert_eq!(b.values(), &[100.0, 0.0, 0.0, 100.0]);
        assert!(build_overlap_block(100.0, &[0, 1], &[2, 3]).is_zero());
        let b = build_overlap_block(100.0, &[0, 1, 2], &[2]);
        assert_eq!(b.values(), &[0.0, 0.0, 100.0]);
    }

    #[test]
    fn adjacency_block_on_round_four() {
        let t = Table::round("t", 0.0, 0.0, 1.0, 4).unwrap();
        let sigma: BTreeSet<_> = crate::model::adjacency_pairs(&t);
        let all = [0, 1, 2, 3];
        let b = build_pair_block(-5.0, &sigma, &all, &all);
        let mut hits = 0;
        for a in 0..4 {
            for c in 0..4 {
                let adjacent = (a + 1) % 4 == c || (c + 1) % 4 == a;
                assert_eq!(b.get(a, c), if adjacent { -5.0 } else { 0.0 });
                hits += adjacent as usize;
            }
        }
        assert_eq!(hits, 8);
        assert_eq!(b, b.transpose());
    }

    #[test]
    fn same_table_on_solo_table_is_empty() {
        let t = Table::round("solo", 0.0, 0.0, 1.0, 1).unwrap();
        let sigma = crate::model::same_table_pairs(&t);
        assert!(build_pair_block(3.0, &sigma, &[0], &[0]).is_zero());
    }

    #[test]
    fn proximity_block_on_square_table() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let t = Table::round("t", 0.0, 0.0, r, 4).unwrap();
        let pos = crate::model::layout_coordinates(&t);
        let all = [0, 1, 2, 3];
        let b = build_proximity_block(1.0, 1.0, &pos, &all, &all);
        // Frozen from a hand evaluation: adjacent chord 1, diagonal sqrt(2).
        assert!((b.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((b.get(0, 2) - 0.36787944117144233).abs() < 1e-12);
        assert!((b.get(1, 1) - std::f64::consts::E).abs() < 1e-12);
        let neg = build_proximity_block(-4.0, 3.0, &pos, &all, &all);
        assert!(neg.values().iter().all(|&v| v < 0.0));
    }

    #[test]
    fn all_fixed_collapses_to_constant() {
        let p = SeatingProblem::builder()
            .table(Table::round("t", 0.0, 0.0, 1.0, 4).unwrap())
            .guests(["a", "b", "c"])
            .fix(0, 0)
            .fix(1, 1)
            .fix(2, 2)
            .constraint(ConstraintSpec::adjacent(0, 1, -5.0))
            .constraint(ConstraintSpec::adjacent(1, 2, -5.0))
            .constraint(ConstraintSpec::same_table(0, 2, 2.0))
            .build()
            .unwrap();
        let (cfn, map) = compile_cfn(&p).unwrap();
        assert_eq!(cfn.node_count(), 0);
        assert_eq!(cfn.constant_offset(), -8.0);
        assert_eq!(cfn.evaluate(&Assignment::new(vec![])), -8.0);
        assert_eq!(map.full_seating(&Assignment::new(vec![])), vec![0, 1, 2]);
    }

    #[test]
    fn fixed_partner_folds_into_one_node_terms() {
        let p = SeatingProblem::builder()
            .table(Table::round("t", 0.0, 0.0, 1.0, 4).unwrap())
            .guests(["a", "b"])
            .fix(0, 0)
            .constraint(ConstraintSpec::adjacent(0, 1, -5.0))
            .build()
            .unwrap();
        let (cfn, map) = compile_cfn(&p).unwrap();
        assert_eq!(cfn.node_count(), 1);
        assert_eq!(cfn.one_node(0), &[100.0, -5.0, 0.0, -5.0]);
        assert_eq!(map.assignment_for(&[0, 3]), Some(Assignment::new(vec![3])));
        assert_eq!(map.assignment_for(&[1, 3]), None);
    }
}
