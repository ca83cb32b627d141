//! SVG seating charts.

use std::fmt::Write;

use crate::model::{layout_coordinates, Layout, Point, SeatingProblem};

const SCALE: f64 = 60.0;
const MARGIN: f64 = 80.0;
const SEAT_RADIUS: f64 = 7.0;
const LABEL_STEP: f64 = 12.0;

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Render tables, seats and (optionally) a seating as an SVG 1.1 document.
///
/// `seating[g]` is the global seat of guest `g`. Seats holding more than one
/// guest are flagged and their labels stacked. Output is deterministic.
pub fn render_chart(problem: &SeatingProblem, seating: Option<&[usize]>) -> String {
    let points: Vec<Point> = problem.seats().iter().map(|s| s.position).collect();
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    let mut grow = |p: Point, r: f64| {
        min_x = min_x.min(p.x - r);
        min_y = min_y.min(p.y - r);
        max_x = max_x.max(p.x + r);
        max_y = max_y.max(p.y + r);
    };
    for p in &points {
        grow(*p, 0.0);
    }
    for t in problem.tables() {
        if let Layout::Round { center, radius, .. } = *t.layout() {
            grow(center, radius);
        }
    }
    let width = (max_x - min_x) * SCALE + 2.0 * MARGIN;
    let height = (max_y - min_y) * SCALE + 2.0 * MARGIN;
    // SVG y grows downward; flip so the layout reads as drawn.
    let map = |p: Point| {
        (
            (p.x - min_x) * SCALE + MARGIN,
            (max_y - p.y) * SCALE + MARGIN,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{width:.1}" height="{height:.1}" fill="white"/>"#
    );

    for (ti, table) in problem.tables().iter().enumerate() {
        let coords = layout_coordinates(table);
        match *table.layout() {
            Layout::Round { center, radius, .. } => {
                let (cx, cy) = map(center);
                let _ = writeln!(
                    svg,
                    r##"<circle class="table" cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#888" stroke-width="2"/>"##,
                    radius * SCALE
                );
                let _ = writeln!(
                    svg,
                    r##"<text class="table-label" x="{cx:.2}" y="{cy:.2}" text-anchor="middle" font-family="sans-serif" font-size="11" fill="#555">{}</text>"##,
                    xml_escape(table.id())
                );
            }
            Layout::Row { .. } => {
                let (x1, y1) = map(coords[0]);
                let (x2, y2) = map(*coords.last().unwrap_or(&coords[0]));
                let _ = writeln!(
                    svg,
                    r##"<line class="table" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#888" stroke-width="2"/>"##
                );
                let _ = writeln!(
                    svg,
                    r##"<text class="table-label" x="{x1:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="#555">{}</text>"##,
                    y1 + 2.5 * SEAT_RADIUS,
                    xml_escape(table.id())
                );
            }
        }
        for seat in problem.table_seats(ti) {
            let (x, y) = map(points[seat]);
            let _ = writeln!(
                svg,
                r##"<circle class="seat" cx="{x:.2}" cy="{y:.2}" r="{SEAT_RADIUS}" fill="#ddd" stroke="#333"/>"##
            );
        }
    }

    if let Some(seating) = seating {
        let mut occupants: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
        for (g, &s) in seating.iter().enumerate() {
            if s < points.len() && g < problem.guest_count() {
                occupants[s].push(g);
            }
        }
        for (seat, guests) in occupants.iter().enumerate() {
            if guests.is_empty() {
                continue;
            }
            let (x, y) = map(points[seat]);
            if guests.len() > 1 {
                let _ = writeln!(
                    svg,
                    r##"<circle class="overlap" cx="{x:.2}" cy="{y:.2}" r="{:.1}" fill="none" stroke="#c00" stroke-width="2"/>"##,
                    SEAT_RADIUS + 4.0
                );
            }
            for (k, &g) in guests.iter().enumerate() {
                let fill = if guests.len() > 1 { "#c00" } else { "#000" };
                let _ = writeln!(
                    svg,
                    r#"<text class="guest" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" fill="{fill}">{}</text>"#,
                    x + SEAT_RADIUS + 3.0,
                    y + 3.0 + k as f64 * LABEL_STEP,
                    xml_escape(&problem.guests()[g].id)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{builtin_problem, Builtin};

    #[test]
    fn deterministic_and_flags_overlaps() {
        let p = builtin_problem(Builtin::Prob1);
        let a = render_chart(&p, Some(&[0, 0, 1, 2]));
        assert_eq!(a, render_chart(&p, Some(&[0, 0, 1, 2])));
        assert_eq!(a.matches(r#"class="overlap""#).count(), 1);
        assert_eq!(a.matches(r#"class="guest""#).count(), 4);
        assert!(!render_chart(&p, None).contains("class=\"guest\""));
    }

    #[test]
    fn escapes_text() {
        assert_eq!(xml_escape("a<b&'\""), "a&lt;b&amp;&apos;&quot;");
    }
}
