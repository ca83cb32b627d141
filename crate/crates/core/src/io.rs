//! Line-oriented text format for seating problems, and the built-in
//! benchmark set.
//!
//! ```text
//! # comment
//! [tables]
//! round <id> cx=<f> cy=<f> radius=<f> seats=<n>
//! row   <id> cx=<f> cy=<f> spacing=<f> angle_deg=<f> seats=<n>
//! [guests]
//! guest <id>
//! [assignments]
//! assign <guest> <table>:<seat>
//! [restraints]
//! restrict <guest> tables <table>[,<table>...]
//! restrict <guest> seats <table>:<seat>[,<table>:<seat>...]
//! [constraints]
//! overlap_penalty <f>
//! adjacent   <g1> <g2> <f>
//! same_table <g1> <g2> <f>
//! proximity  <g1> <g2> p=<f> lambda=<f>
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::constraint::{ConstraintKind, ConstraintSpec};
use crate::model::{Layout, ModelError, SeatingProblem, Table};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Tables,
    Guests,
    Assignments,
    Restraints,
    Constraints,
}

/// Named `key=value` parameters of one line, consumed as they are read.
struct Params<'a> {
    line: usize,
    values: HashMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn new(line: usize, tokens: &[&'a str]) -> Result<Self, ParseError> {
        let mut values = HashMap::new();
        for tok in tokens {
            let (k, v) = tok.split_once('=').ok_or_else(|| {
                ParseError::new(line, format!("expected key=value, found `{tok}`"))
            })?;
            if values.insert(k, v).is_some() {
                return Err(ParseError::new(
                    line,
                    format!("parameter `{k}` given twice"),
                ));
            }
        }
        Ok(Self { line, values })
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<T, ParseError> {
        let raw = self
            .values
            .remove(key)
            .ok_or_else(|| ParseError::new(self.line, format!("missing parameter `{key}`")))?;
        raw.parse()
            .map_err(|_| ParseError::new(self.line, format!("bad value `{raw}` for `{key}`")))
    }

    fn finish(self) -> Result<(), ParseError> {
        match self.values.keys().next() {
            Some(k) => Err(ParseError::new(
                self.line,
                format!("unknown parameter `{k}`"),
            )),
            None => Ok(()),
        }
    }
}

fn number<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("bad {what} `{tok}`")))
}

fn arity(line: usize, tokens: &[&str], n: usize) -> Result<(), ParseError> {
    if tokens.len() == n {
        Ok(())
    } else {
        Err(ParseError::new(
            line,
            format!(
                "`{}` expects {} fields, found {}",
                tokens[0],
                n - 1,
                tokens.len() - 1
            ),
        ))
    }
}

struct Raw<'a> {
    tables: Vec<(usize, Table)>,
    guests: Vec<(usize, &'a str)>,
    assignments: Vec<(usize, &'a str, &'a str)>,
    restraints: Vec<(usize, &'a str, bool, &'a str)>,
    constraints: Vec<(usize, ConstraintKind, &'a str, &'a str, f64)>,
    overlap_penalty: Option<(usize, f64)>,
}

/// Parse and validate a problem file.
pub fn parse_problem(text: &str) -> Result<SeatingProblem, ParseError> {
    let raw = read_lines(text)?;
    resolve(raw)
}

fn read_lines(text: &str) -> Result<Raw<'_>, ParseError> {
    let mut raw = Raw {
        tables: Vec::new(),
        guests: Vec::new(),
        assignments: Vec::new(),
        restraints: Vec::new(),
        constraints: Vec::new(),
        overlap_penalty: None,
    };
    let mut section = None;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(match name.trim() {
                "tables" => Section::Tables,
                "guests" => Section::Guests,
                "assignments" => Section::Assignments,
                "restraints" => Section::Restraints,
                "constraints" => Section::Constraints,
                other => {
                    return Err(ParseError::new(
                        line,
                        format!("unknown section `[{other}]`"),
                    ))
                }
            });
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(section) = section else {
            return Err(ParseError::new(
                line,
                "content before the first section header",
            ));
        };
        match (section, tokens[0]) {
            (Section::Tables, kind @ ("round" | "row")) => {
                if tokens.len() < 2 {
                    return Err(ParseError::new(line, "missing table id"));
                }
                let mut p = Params::new(line, &tokens[2..])?;
                let (cx, cy): (f64, f64) = (p.take("cx")?, p.take("cy")?);
                let layout = if kind == "round" {
                    Layout::Round {
                        center: crate::model::Point::new(cx, cy),
                        radius: p.take("radius")?,
                        seat_count: p.take("seats")?,
                    }
                } else {
                    Layout::Row {
                        start: crate::model::Point::new(cx, cy),
                        spacing: p.take("spacing")?,
                        angle_deg: p.take("angle_deg")?,
                        seat_count: p.take("seats")?,
                    }
                };
                p.finish()?;
                let table = Table::new(tokens[1], layout)
                    .map_err(|e| ParseError::new(line, e.to_string()))?;
                raw.tables.push((line, table));
            }
            (Section::Guests, "guest") => {
                arity(line, &tokens, 2)?;
                raw.guests.push((line, tokens[1]));
            }
            (Section::Assignments, "assign") => {
                arity(line, &tokens, 3)?;
                raw.assignments.push((line, tokens[1], tokens[2]));
            }
            (Section::Restraints, "restrict") => {
                arity(line, &tokens, 4)?;
                let by_table = match tokens[2] {
                    "tables" => true,
                    "seats" => false,
                    other => {
                        return Err(ParseError::new(
                            line,
                            format!("expected `tables` or `seats`, found `{other}`"),
                        ))
                    }
                };
                raw.restraints.push((line, tokens[1], by_table, tokens[3]));
            }
            (Section::Constraints, "overlap_penalty") => {
                arity(line, &tokens, 2)?;
                if raw.overlap_penalty.is_some() {
                    return Err(ParseError::new(line, "overlap_penalty given twice"));
                }
                raw.overlap_penalty = Some((line, number(line, tokens[1], "penalty")?));
            }
            (Section::Constraints, kind @ ("adjacent" | "same_table")) => {
                arity(line, &tokens, 4)?;
                let kind = if kind == "adjacent" {
                    ConstraintKind::Adjacent
                } else {
                    ConstraintKind::SameTable
                };
                let penalty = number(line, tokens[3], "penalty")?;
                raw.constraints
                    .push((line, kind, tokens[1], tokens[2], penalty));
            }
            (Section::Constraints, "proximity") => {
                if tokens.len() < 3 {
                    return Err(ParseError::new(line, "proximity needs two guests"));
                }
                let mut p = Params::new(line, &tokens[3..])?;
                let penalty: f64 = p.take("p")?;
                let lambda: f64 = p.take("lambda")?;
                p.finish()?;
                raw.constraints.push((
                    line,
                    ConstraintKind::Proximity { lambda },
                    tokens[1],
                    tokens[2],
                    penalty,
                ));
            }
            (_, keyword) => {
                return Err(ParseError::new(
                    line,
                    format!("unexpected `{keyword}` in [{}]", section_name(section)),
                ))
            }
        }
    }
    Ok(raw)
}

fn section_name(s: Section) -> &'static str {
    match s {
        Section::Tables => "tables",
        Section::Guests => "guests",
        Section::Assignments => "assignments",
        Section::Restraints => "restraints",
        Section::Constraints => "constraints",
    }
}

fn resolve(raw: Raw<'_>) -> Result<SeatingProblem, ParseError> {
    let mut table_index: HashMap<&str, (usize, usize, usize)> = HashMap::new();
    let mut offset = 0;
    for (t, (line, table)) in raw.tables.iter().enumerate() {
        if table_index
            .insert(table.id(), (t, offset, table.seat_count()))
            .is_some()
        {
            return Err(ParseError::new(
                *line,
                format!("duplicate table id `{}`", table.id()),
            ));
        }
        offset += table.seat_count();
    }
    let seat_total = offset;

    let mut guest_index: HashMap<&str, usize> = HashMap::new();
    for (g, &(line, id)) in raw.guests.iter().enumerate() {
        if guest_index.insert(id, g).is_some() {
            return Err(ParseError::new(line, format!("duplicate guest id `{id}`")));
        }
    }
    if raw.guests.len() > seat_total {
        let line = raw.guests[seat_total].0;
        return Err(ParseError::new(
            line,
            format!(
                "{} guests do not fit in {} seats",
                raw.guests.len(),
                seat_total
            ),
        ));
    }

    let guest = |line: usize, id: &str| {
        guest_index
            .get(id)
            .copied()
            .ok_or_else(|| ParseError::new(line, format!("unknown guest `{id}`")))
    };
    let seat = |line: usize, r: &str| -> Result<usize, ParseError> {
        let (t, k) = r.split_once(':').ok_or_else(|| {
            ParseError::new(line, format!("expected <table>:<seat>, found `{r}`"))
        })?;
        let &(_, off, n) = table_index
            .get(t)
            .ok_or_else(|| ParseError::new(line, format!("unknown table `{t}`")))?;
        let k: usize = number(line, k, "seat index")?;
        if k >= n {
            return Err(ParseError::new(
                line,
                format!("table `{t}` has no seat {k}"),
            ));
        }
        Ok(off + k)
    };

    let mut builder = SeatingProblem::builder();
    for (_, table) in &raw.tables {
        builder = builder.table(table.clone());
    }
    builder = builder.guests(raw.guests.iter().map(|&(_, id)| id));

    let mut seat_owner: BTreeMap<usize, usize> = BTreeMap::new();
    let mut fixed_guests: BTreeMap<usize, usize> = BTreeMap::new();
    for &(line, g, r) in &raw.assignments {
        let g = guest(line, g)?;
        let s = seat(line, r)?;
        if let Some(&prev) = fixed_guests.get(&g) {
            return Err(ParseError::new(
                line,
                format!(
                    "guest `{}` already assigned on line {prev}",
                    raw.guests[g].1
                ),
            ));
        }
        if let Some(&other) = seat_owner.get(&s) {
            return Err(ParseError::new(
                line,
                format!("seat `{r}` already assigned to `{}`", raw.guests[other].1),
            ));
        }
        fixed_guests.insert(g, line);
        seat_owner.insert(s, g);
        builder = builder.fix(g, s);
    }

    for &(line, g, by_table, list) in &raw.restraints {
        let g = guest(line, g)?;
        let mut seats = Vec::new();
        for item in list.split(',').filter(|s| !s.is_empty()) {
            if by_table {
                let &(_, off, n) = table_index
                    .get(item)
                    .ok_or_else(|| ParseError::new(line, format!("unknown table `{item}`")))?;
                seats.extend(off..off + n);
            } else {
                seats.push(seat(line, item)?);
            }
        }
        if seats.is_empty() {
            return Err(ParseError::new(line, "empty restraint list"));
        }
        builder = builder.restrain(g, seats);
    }

    for &(line, kind, a, b, penalty) in &raw.constraints {
        let spec = ConstraintSpec {
            kind,
            first: guest(line, a)?,
            second: guest(line, b)?,
            penalty,
        };
        spec.validate().map_err(|m| ParseError::new(line, m))?;
        builder = builder.constraint(spec);
    }
    if let Some((_, p)) = raw.overlap_penalty {
        builder = builder.overlap_penalty(p);
    }

    builder.build().map_err(|e| {
        let line = match (&e, raw.overlap_penalty) {
            (ModelError::BadOverlapPenalty(_), Some((line, _))) => line,
            (ModelError::FixedOutsideRestraint { guest, .. }, _) => raw
                .assignments
                .iter()
                .find(|(_, g, _)| g == guest)
                .map_or(0, |a| a.0),
            _ => 0,
        };
        ParseError::new(line, e.to_string())
    })
}

/// Write a problem in the text format. Restraints are written as explicit seat lists.
pub fn serialize_problem(problem: &SeatingProblem) -> String {
    let mut out = String::new();
    // Writing into a String cannot fail.
    write_problem(problem, &mut out).expect("formatting into a String");
    out
}

fn write_problem(p: &SeatingProblem, out: &mut String) -> fmt::Result {
    let seat_ref = |s: usize| {
        let seat = &p.seats()[s];
        format!("{}:{}", p.tables()[seat.table].id(), seat.index_in_table)
    };
    let guest = |g: usize| p.guests()[g].id.as_str();

    writeln!(out, "[tables]")?;
    for t in p.tables() {
        match *t.layout() {
            Layout::Round {
                center,
                radius,
                seat_count,
            } => writeln!(
                out,
                "round {} cx={:?} cy={:?} radius={:?} seats={}",
                t.id(),
                center.x,
                center.y,
                radius,
                seat_count
            )?,
            Layout::Row {
                start,
                spacing,
                angle_deg,
                seat_count,
            } => writeln!(
                out,
                "row {} cx={:?} cy={:?} spacing={:?} angle_deg={:?} seats={}",
                t.id(),
                start.x,
                start.y,
                spacing,
                angle_deg,
                seat_count
            )?,
        }
    }
    writeln!(out, "\n[guests]")?;
    for g in p.guests() {
        writeln!(out, "guest {}", g.id)?;
    }
    if !p.fixed_assignments().is_empty() {
        writeln!(out, "\n[assignments]")?;
        for (&g, &s) in p.fixed_assignments() {
            writeln!(out, "assign {} {}", guest(g), seat_ref(s))?;
        }
    }
    if !p.restraints().is_empty() {
        writeln!(out, "\n[restraints]")?;
        for (&g, seats) in p.restraints() {
            let list: Vec<String> = seats.iter().map(|&s| seat_ref(s)).collect();
            writeln!(out, "restrict {} seats {}", guest(g), list.join(","))?;
        }
    }
    writeln!(out, "\n[constraints]")?;
    writeln!(out, "overlap_penalty {:?}", p.overlap_penalty())?;
    for c in p.constraints() {
        let (a, b) = (guest(c.first), guest(c.second));
        match c.kind {
            ConstraintKind::Adjacent => writeln!(out, "adjacent {a} {b} {:?}", c.penalty)?,
            ConstraintKind::SameTable => writeln!(out, "same_table {a} {b} {:?}", c.penalty)?,
            ConstraintKind::Proximity { lambda } => writeln!(
                out,
                "proximity {a} {b} p={:?} lambda={:?}",
                c.penalty, lambda
            )?,
        }
    }
    Ok(())
}

/// The shipped benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Prob1,
    Prob2,
    Prob3,
    Prob4,
    Prob5s,
    Prob5,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Prob1,
        Builtin::Prob2,
        Builtin::Prob3,
        Builtin::Prob4,
        Builtin::Prob5s,
        Builtin::Prob5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Prob1 => "prob1",
            Builtin::Prob2 => "prob2",
            Builtin::Prob3 => "prob3",
            Builtin::Prob4 => "prob4",
            Builtin::Prob5s => "prob5s",
            Builtin::Prob5 => "prob5",
        }
    }

    pub fn source(self) -> ProblemSource {
        let raw_text = match self {
            Builtin::Prob1 => include_str!("../data/prob1.txt"),
            Builtin::Prob2 => include_str!("../data/prob2.txt"),
            Builtin::Prob3 => include_str!("../data/prob3.txt"),
            Builtin::Prob4 => include_str!("../data/prob4.txt"),
            Builtin::Prob5s => include_str!("../data/prob5s.txt"),
            Builtin::Prob5 => include_str!("../data/prob5.txt"),
        };
        ProblemSource {
            name: self.name(),
            raw_text,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown built-in problem `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSource {
    pub name: &'static str,
    pub raw_text: &'static str,
}

pub fn builtin_problem(which: Builtin) -> SeatingProblem {
    parse_problem(which.source().raw_text)
        .unwrap_or_else(|e| panic!("built-in {which} does not parse: {e}"))
}
