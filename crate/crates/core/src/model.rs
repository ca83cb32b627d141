//! Tables, seats, guests and the geometry derived from them.
//!
//! Every seat gets a global index in `0..D`; positions are computed once
//! from the owning table's layout and never change afterwards.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use thiserror::Error;

use crate::constraint::ConstraintSpec;

/// Penalty applied per pair of guests sharing a seat when a problem does not set one.
pub const DEFAULT_OVERLAP_PENALTY: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("table `{0}` must have at least one seat")]
    NoSeats(String),
    #[error("table `{table}` has non-positive {what} {value}")]
    BadGeometry {
        table: String,
        what: &'static str,
        value: f64,
    },
    #[error("duplicate table id `{0}`")]
    DuplicateTable(String),
    #[error("duplicate guest id `{0}`")]
    DuplicateGuest(String),
    #[error("{guests} guests do not fit in {seats} seats")]
    TooManyGuests { guests: usize, seats: usize },
    #[error("guest index {0} out of range")]
    UnknownGuest(usize),
    #[error("seat index {0} out of range")]
    UnknownSeat(usize),
    #[error("guests `{0}` and `{1}` are both fixed to seat {2}")]
    SharedFixedSeat(String, String, usize),
    #[error("guest `{guest}` is fixed to seat {seat}, outside its restraint set")]
    FixedOutsideRestraint { guest: String, seat: usize },
    #[error("guest `{0}` has an empty restraint set")]
    EmptyRestraint(String),
    #[error("invalid constraint: {0}")]
    BadConstraint(String),
    #[error("overlap penalty must be positive and finite, got {0}")]
    BadOverlapPenalty(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// How the seats of a table are laid out.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Seats evenly spaced on a circle, seat 0 due east, counterclockwise.
    Round {
        center: Point,
        radius: f64,
        seat_count: usize,
    },
    /// Seats on a straight line starting at `start`, heading `angle_deg`
    /// degrees counterclockwise from east.
    Row {
        start: Point,
        spacing: f64,
        angle_deg: f64,
        seat_count: usize,
    },
}

impl Layout {
    pub fn seat_count(&self) -> usize {
        match *self {
            Layout::Round { seat_count, .. } | Layout::Row { seat_count, .. } => seat_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    id: String,
    layout: Layout,
}

impl Table {
    pub fn new(id: impl Into<String>, layout: Layout) -> Result<Self, ModelError> {
        let id = id.into();
        if layout.seat_count() == 0 {
            return Err(ModelError::NoSeats(id));
        }
        let (what, value) = match layout {
            Layout::Round { radius, .. } => ("radius", radius),
            Layout::Row { spacing, .. } => ("spacing", spacing),
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(ModelError::BadGeometry {
                table: id,
                what,
                value,
            });
        }
        Ok(Self { id, layout })
    }

    pub fn round(
        id: impl Into<String>,
        cx: f64,
        cy: f64,
        radius: f64,
        seats: usize,
    ) -> Result<Self, ModelError> {
        Self::new(
            id,
            Layout::Round {
                center: Point::new(cx, cy),
                radius,
                seat_count: seats,
            },
        )
    }

    pub fn row(
        id: impl Into<String>,
        x: f64,
        y: f64,
        spacing: f64,
        angle_deg: f64,
        seats: usize,
    ) -> Result<Self, ModelError> {
        Self::new(
            id,
            Layout::Row {
                start: Point::new(x, y),
                spacing,
                angle_deg,
                seat_count: seats,
            },
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn seat_count(&self) -> usize {
        self.layout.seat_count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seat {
    pub global_index: usize,
    pub table: usize,
    pub index_in_table: usize,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guest {
    pub id: String,
    pub node_index: usize,
}

/// Seat positions of one table, in seat order.
pub fn layout_coordinates(table: &Table) -> Vec<Point> {
    match *table.layout() {
        Layout::Round {
            center,
            radius,
            seat_count,
        } => (0..seat_count)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / seat_count as f64;
                Point::new(
                    center.x + radius * theta.cos(),
                    center.y + radius * theta.sin(),
                )
            })
            .collect(),
        Layout::Row {
            start,
            spacing,
            angle_deg,
            seat_count,
        } => {
            let (sin, cos) = angle_deg.to_radians().sin_cos();
            (0..seat_count)
                .map(|k| {
                    let step = k as f64 * spacing;
                    Point::new(start.x + step * cos, start.y + step * sin)
                })
                .collect()
        }
    }
}

pub fn seat_distance(a: &Seat, b: &Seat) -> f64 {
    a.position.distance(b.position)
}

/// Unordered neighbouring seat pairs within a table, as `(lo, hi)` local indices.
pub fn adjacency_pairs(table: &Table) -> BTreeSet<(usize, usize)> {
    let n = table.seat_count();
    let mut pairs: BTreeSet<(usize, usize)> = (1..n).map(|k| (k - 1, k)).collect();
    if matches!(table.layout(), Layout::Round { .. }) && n >= 3 {
        pairs.insert((0, n - 1));
    }
    pairs
}

/// All unordered seat pairs within a table, as `(lo, hi)` local indices.
pub fn same_table_pairs(table: &Table) -> BTreeSet<(usize, usize)> {
    let n = table.seat_count();
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

/// A validated seating problem.
///
/// Guests and seats are referred to by index everywhere except in the text
/// format; `guest_index` and `seat_ref` translate names.
#[derive(Debug, Clone, PartialEq)]
pub struct SeatingProblem {
    tables: Vec<Table>,
    seats: Vec<Seat>,
    table_offsets: Vec<usize>,
    guests: Vec<Guest>,
    fixed: BTreeMap<usize, usize>,
    restraints: BTreeMap<usize, BTreeSet<usize>>,
    constraints: Vec<ConstraintSpec>,
    overlap_penalty: f64,
}

impl SeatingProblem {
    pub fn builder() -> SeatingProblemBuilder {
        SeatingProblemBuilder::default()
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn seats(&self) -> &[Seat] {
        &self.seats
    }

    pub fn guests(&self) -> &[Guest] {
        &self.guests
    }

    pub fn seat_count(&self) -> usize {
        self.seats.len()
    }

    pub fn guest_count(&self) -> usize {
        self.guests.len()
    }

    /// Guest index to fixed global seat.
    pub fn fixed_assignments(&self) -> &BTreeMap<usize, usize> {
        &self.fixed
    }

    /// Guest index to the set of global seats it may occupy.
    pub fn restraints(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.restraints
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn overlap_penalty(&self) -> f64 {
        self.overlap_penalty
    }

    pub fn guest_index(&self, id: &str) -> Option<usize> {
        self.guests.iter().position(|g| g.id == id)
    }

    pub fn table_index(&self, id: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.id() == id)
    }

    /// Global seat indices belonging to a table.
    pub fn table_seats(&self, table: usize) -> std::ops::Range<usize> {
        let start = self.table_offsets[table];
        start..start + self.tables[table].seat_count()
    }

    /// Global index of seat `index_in_table` at table `table_id`.
    pub fn seat_ref(&self, table_id: &str, index_in_table: usize) -> Option<usize> {
        let t = self.table_index(table_id)?;
        (index_in_table < self.tables[t].seat_count())
            .then(|| self.table_offsets[t] + index_in_table)
    }

    /// Seats a guest may take: its fixed seat, its restraint set, or every seat.
    pub fn allowed_seats(&self, guest: usize) -> Vec<usize> {
        if let Some(&s) = self.fixed.get(&guest) {
            return vec![s];
        }
        match self.restraints.get(&guest) {
            Some(set) => set.iter().copied().collect(),
            None => (0..self.seats.len()).collect(),
        }
    }

    /// Unordered global seat pairs that are neighbours at some table.
    pub fn adjacent_seat_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.global_pairs(adjacency_pairs)
    }

    /// Unordered global seat pairs that share a table.
    pub fn same_table_seat_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.global_pairs(same_table_pairs)
    }

    fn global_pairs(
        &self,
        local: fn(&Table) -> BTreeSet<(usize, usize)>,
    ) -> BTreeSet<(usize, usize)> {
        self.tables
            .iter()
            .zip(&self.table_offsets)
            .flat_map(|(t, &off)| local(t).into_iter().map(move |(a, b)| (off + a, off + b)))
            .collect()
    }
}

/// Collects problem parts and validates them all at once in [`build`](Self::build).
#[derive(Debug, Default, Clone)]
pub struct SeatingProblemBuilder {
    tables: Vec<Table>,
    guests: Vec<String>,
    fixed: Vec<(usize, usize)>,
    restraints: Vec<(usize, Vec<usize>)>,
    constraints: Vec<ConstraintSpec>,
    overlap_penalty: Option<f64>,
}

impl SeatingProblemBuilder {
    pub fn table(mut self, table: Table) -> Self {
        self.tables.push(table);
        self
    }

    pub fn guest(mut self, id: impl Into<String>) -> Self {
        self.guests.push(id.into());
        self
    }

    pub fn guests<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.guests.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn fix(mut self, guest: usize, seat: usize) -> Self {
        self.fixed.push((guest, seat));
        self
    }

    /// Restrict a guest to a set of global seats. Repeated calls for the same
    /// guest accumulate.
    pub fn restrain(mut self, guest: usize, seats: impl IntoIterator<Item = usize>) -> Self {
        self.restraints.push((guest, seats.into_iter().collect()));
        self
    }

    pub fn constraint(mut self, c: ConstraintSpec) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn overlap_penalty(mut self, p: f64) -> Self {
        self.overlap_penalty = Some(p);
        self
    }

    pub fn build(self) -> Result<SeatingProblem, ModelError> {
        let mut table_ids = BTreeSet::new();
        let mut seats = Vec::new();
        let mut table_offsets = Vec::with_capacity(self.tables.len());
        for (t, table) in self.tables.iter().enumerate() {
            if !table_ids.insert(table.id()) {
                return Err(ModelError::DuplicateTable(table.id().to_string()));
            }
            table_offsets.push(seats.len());
            for (k, position) in layout_coordinates(table).into_iter().enumerate() {
                seats.push(Seat {
                    global_index: seats.len(),
                    table: t,
                    index_in_table: k,
                    position,
                });
            }
        }

        let mut guest_ids = BTreeSet::new();
        for id in &self.guests {
            if !guest_ids.insert(id.as_str()) {
                return Err(ModelError::DuplicateGuest(id.clone()));
            }
        }
        if self.guests.len() > seats.len() {
            return Err(ModelError::TooManyGuests {
                guests: self.guests.len(),
                seats: seats.len(),
            });
        }
        let guests: Vec<Guest> = self
            .guests
            .into_iter()
            .enumerate()
            .map(|(node_index, id)| Guest { id, node_index })
            .collect();
        let check_guest = |g: usize| {
            if g < guests.len() {
                Ok(())
            } else {
                Err(ModelError::UnknownGuest(g))
            }
        };
        let check_seat = |s: usize| {
            if s < seats.len() {
                Ok(())
            } else {
                Err(ModelError::UnknownSeat(s))
            }
        };

        let mut restraints: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (g, set) in self.restraints {
            check_guest(g)?;
            for &s in &set {
                check_seat(s)?;
            }
            restraints.entry(g).or_default().extend(set);
        }
        if let Some((&g, _)) = restraints.iter().find(|(_, set)| set.is_empty()) {
            return Err(ModelError::EmptyRestraint(guests[g].id.clone()));
        }

        let mut fixed = BTreeMap::new();
        let mut seat_owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (g, s) in self.fixed {
            check_guest(g)?;
            check_seat(s)?;
            if let Some(&other) = seat_owner.get(&s) {
                if other != g {
                    return Err(ModelError::SharedFixedSeat(
                        guests[other].id.clone(),
                        guests[g].id.clone(),
                        s,
                    ));
                }
            }
            if let Some(set) = restraints.get(&g) {
                if !set.contains(&s) {
                    return Err(ModelError::FixedOutsideRestraint {
                        guest: guests[g].id.clone(),
                        seat: s,
                    });
                }
            }
            if let Some(prev) = fixed.insert(g, s) {
                seat_owner.remove(&prev);
            }
            seat_owner.insert(s, g);
        }

        for c in &self.constraints {
            check_guest(c.first)?;
            check_guest(c.second)?;
            c.validate().map_err(ModelError::BadConstraint)?;
        }

        let overlap_penalty = self.overlap_penalty.unwrap_or(DEFAULT_OVERLAP_PENALTY);
        if !(overlap_penalty > 0.0 && overlap_penalty.is_finite()) {
            return Err(ModelError::BadOverlapPenalty(overlap_penalty));
        }

        Ok(SeatingProblem {
            tables: self.tables,
            seats,
            table_offsets,
            guests,
            fixed,
            restraints,
            constraints: self.constraints,
            overlap_penalty,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Point, x: f64, y: f64) -> bool {
        (a.x - x).abs() < 1e-12 && (a.y - y).abs() < 1e-12
    }

    #[test]
    fn round_unit_four_seats() {
        let t = Table::round("t", 0.0, 0.0, 1.0, 4).unwrap();
        let p = layout_coordinates(&t);
        assert!(close(p[0], 1.0, 0.0));
        assert!(close(p[1], 0.0, 1.0));
        assert!(close(p[2], -1.0, 0.0));
        assert!(close(p[3], 0.0, -1.0));
    }

    #[test]
    fn round_single_seat_sits_east_of_center() {
        let t = Table::round("solo", 5.0, 5.0, 2.0, 1).unwrap();
        assert_eq!(layout_coordinates(&t), vec![Point::new(7.0, 5.0)]);
    }

    #[test]
    fn row_is_arithmetic_progression() {
        let t = Table::row("r", 0.0, 0.0, 1.5, 0.0, 3).unwrap();
        assert_eq!(
            layout_coordinates(&t),
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.5, 0.0),
                Point::new(3.0, 0.0)
            ]
        );
    }

    #[test]
    fn distances() {
        let seat = |x, y| Seat {
            global_index: 0,
            table: 0,
            index_in_table: 0,
            position: Point::new(x, y),
        };
        assert_eq!(seat_distance(&seat(0.0, 0.0), &seat(3.0, 4.0)), 5.0);
        assert_eq!(seat_distance(&seat(2.0, 2.0), &seat(2.0, 2.0)), 0.0);

        let t = Table::round("t", 0.0, 0.0, 1.0, 4).unwrap();
        let p = layout_coordinates(&t);
        assert!((p[0].distance(p[2]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn adjacency() {
        let round4 = Table::round("t", 0.0, 0.0, 1.0, 4).unwrap();
        assert_eq!(
            adjacency_pairs(&round4),
            [(0, 1), (1, 2), (2, 3), (0, 3)].into_iter().collect()
        );
        let round2 = Table::round("t", 0.0, 0.0, 1.0, 2).unwrap();
        assert_eq!(adjacency_pairs(&round2).len(), 1);
        let solo = Table::round("t", 0.0, 0.0, 1.0, 1).unwrap();
        assert!(adjacency_pairs(&solo).is_empty());
        let row3 = Table::row("r", 0.0, 0.0, 1.0, 0.0, 3).unwrap();
        assert_eq!(
            adjacency_pairs(&row3),
            [(0, 1), (1, 2)].into_iter().collect()
        );
    }

    #[test]
    fn same_table_counts() {
        for (n, expected) in [(4, 6), (1, 0), (6, 15)] {
            let t = Table::round("t", 0.0, 0.0, 1.0, n).unwrap();
            assert_eq!(same_table_pairs(&t).len(), expected);
        }
    }

    #[test]
    fn invalid_tables() {
        assert_eq!(
            Table::round("t", 0.0, 0.0, 1.0, 0),
            Err(ModelError::NoSeats("t".into()))
        );
        assert!(Table::round("t", 0.0, 0.0, 0.0, 3).is_err());
        assert!(Table::row("t", 0.0, 0.0, -1.0, 0.0, 3).is_err());
    }

    #[test]
    fn builder_validation() {
        let base = || {
            SeatingProblem::builder()
                .table(Table::round("t", 0.0, 0.0, 1.0, 2).unwrap())
                .guests(["a", "b"])
        };
        let p = base().build().unwrap();
        assert_eq!(p.seat_count(), 2);
        assert_eq!(p.overlap_penalty(), DEFAULT_OVERLAP_PENALTY);
        assert_eq!(p.seat_ref("t", 1), Some(1));
        assert_eq!(p.seat_ref("t", 2), None);

        assert!(matches!(
            base().guest("c").build(),
            Err(ModelError::TooManyGuests {
                guests: 3,
                seats: 2
            })
        ));
        assert!(matches!(
            base().fix(0, 1).fix(1, 1).build(),
            Err(ModelError::SharedFixedSeat(..))
        ));
        assert!(matches!(
            base().fix(0, 7).build(),
            Err(ModelError::UnknownSeat(7))
        ));
        assert!(matches!(
            base().restrain(0, [0]).fix(0, 1).build(),
            Err(ModelError::FixedOutsideRestraint { .. })
        ));
        assert!(matches!(
            SeatingProblem::builder().guests(["a", "a"]).build(),
            Err(ModelError::DuplicateGuest(_))
        ));
    }

    #[test]
    fn global_pairs_stay_within_tables() {
        let p = SeatingProblem::builder()
            .table(Table::round("a", 0.0, 0.0, 1.0, 4).unwrap())
            .table(Table::row("b", 5.0, 0.0, 1.0, 90.0, 3).unwrap())
            .build()
            .unwrap();
        let adj = p.adjacent_seat_pairs();
        assert_eq!(adj.len(), 4 + 2);
        assert!(adj.contains(&(4, 5)) && adj.contains(&(5, 6)));
        assert!(!adj.contains(&(3, 4)));
        assert_eq!(p.same_table_seat_pairs().len(), 6 + 3);
        assert_eq!(p.table_seats(1), 4..7);
    }
}
