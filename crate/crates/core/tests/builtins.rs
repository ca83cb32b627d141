use std::collections::BTreeSet;

use seatopt::chart::render_chart;
use seatopt::qubo::{
    solve_via_qubo, solve_via_qubo_with, AnnealingSampler, Encoding, QuboSolveOptions,
};
use seatopt::report::{run_benchmark, BenchmarkReport, CellResult, SolverKind, SolverSpec};
use seatopt::solvers::*;
use seatopt::*;

fn compiled(b: Builtin) -> (SeatingProblem, CfnProblem, NodeChoiceMap) {
    let p = builtin_problem(b);
    let (cfn, map) = compile_cfn(&p).unwrap();
    (p, cfn, map)
}

/// Every injective seating of a small problem, scored straight from the
/// seating relations rather than through the CFN.
fn permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in 0..n {
            if !cur.contains(&s) {
                cur.push(s);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::new(), &mut out);
    out
}

fn direct_score(p: &SeatingProblem, seating: &[usize]) -> f64 {
    let adjacent = p.adjacent_seat_pairs();
    let same = p.same_table_seat_pairs();
    p.constraints()
        .iter()
        .map(|c| {
            let (x, y) = (seating[c.first], seating[c.second]);
            let key = (x.min(y), x.max(y));
            match c.kind {
                ConstraintKind::Adjacent if adjacent.contains(&key) => c.penalty,
                ConstraintKind::SameTable if same.contains(&key) => c.penalty,
                ConstraintKind::Proximity { lambda } => {
                    let d = p.seats()[x].position.distance(p.seats()[y].position);
                    c.penalty * ((1.0 - d * d) / (lambda * lambda)).exp()
                }
                _ => 0.0,
            }
        })
        .sum()
}

fn optima_by_enumeration(p: &SeatingProblem) -> (f64, BTreeSet<Vec<usize>>) {
    let all = permutations(p.seat_count(), p.guest_count());
    let best = all
        .iter()
        .map(|s| direct_score(p, s))
        .fold(f64::INFINITY, f64::min);
    let set = all
        .into_iter()
        .filter(|s| (direct_score(p, s) - best).abs() < 1e-9)
        .collect();
    (best, set)
}

#[test]
fn prob1_brute_force_matches_enumeration() {
    let (p, cfn, map) = compiled(Builtin::Prob1);
    let (best, seatings) = optima_by_enumeration(&p);
    assert_eq!(best, -15.0);
    assert_eq!(seatings.len(), 8);
    let r = brute_force_solve(&cfn, BruteForceMode::PermutationsOnly).unwrap();
    assert_eq!(r.optimum, -15.0);
    let found: BTreeSet<Vec<usize>> = r
        .solutions
        .iter()
        .map(|s| map.full_seating(&s.assignment))
        .collect();
    assert_eq!(found, seatings);
    // Basil and Charlie sit opposite one another in every optimum.
    let (basil, charlie) = (
        p.guest_index("basil").unwrap(),
        p.guest_index("charlie").unwrap(),
    );
    assert!(found.iter().all(|s| s[basil].abs_diff(s[charlie]) == 2));
    let all = brute_force_solve(&cfn, BruteForceMode::AllCombos).unwrap();
    assert_eq!(all.optimum, r.optimum);
}

#[test]
fn prob2_brute_force_matches_enumeration() {
    let (p, cfn, map) = compiled(Builtin::Prob2);
    let (best, seatings) = optima_by_enumeration(&p);
    assert_eq!(best, -40.0);
    assert_eq!(seatings.len(), 8);
    let r = brute_force_solve(&cfn, BruteForceMode::PermutationsOnly).unwrap();
    let found: BTreeSet<Vec<usize>> = r
        .solutions
        .iter()
        .map(|s| map.full_seating(&s.assignment))
        .collect();
    assert_eq!((r.optimum, found), (best, seatings));
    let solo = p.seat_ref("solo", 0).unwrap();
    let eli = p.guest_index("eli").unwrap();
    assert!(r
        .solutions
        .iter()
        .all(|s| map.full_seating(&s.assignment)[eli] == solo));
    assert_eq!(
        brute_force_solve(&cfn, BruteForceMode::AllCombos)
            .unwrap()
            .optimum,
        -40.0
    );
}

#[test]
fn prob1_compiles_to_expected_structure() {
    let (p, cfn, _) = compiled(Builtin::Prob1);
    assert_eq!((cfn.node_count(), cfn.choice_counts()), (4, vec![4; 4]));
    assert_eq!(p.constraints().len(), 4);
    let pairs: Vec<_> = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .collect();
    assert_eq!(
        pairs
            .iter()
            .filter(|&&(i, j)| cfn.materialized_pair(i, j).is_some())
            .count(),
        6
    );
    assert_eq!(cfn.pair_blocks().count(), 4);
    // Avery, Basil, Dawson, Charlie clockwise.
    let seating = [0, 3, 1, 2];
    let a = Assignment::new(seating.to_vec());
    assert_eq!(cfn.evaluate(&a), -15.0);
    assert_eq!(direct_score(&p, &seating), -15.0);
}

#[test]
fn prob5_fixes_authors_and_restrains_family() {
    let (p, cfn, map) = compiled(Builtin::Prob5);
    assert_eq!((p.guest_count(), p.seat_count()), (37, 40));
    assert_eq!(map.fixed.len(), 2);
    assert_eq!(cfn.node_count(), 35);
    let head: BTreeSet<usize> = p.table_seats(p.table_index("head").unwrap()).collect();
    let restrained: Vec<_> = p.restraints().iter().filter(|(_, s)| **s == head).collect();
    assert_eq!(restrained.len(), 6);
    // Restrained nodes choose among the head seats only.
    for (&g, _) in restrained {
        let node = map.node_of_guest[g].unwrap();
        assert_eq!(cfn.choice_count(node), head.len());
    }
    let (_, small, _) = compiled(Builtin::Prob5s);
    let space = |c: &CfnProblem| {
        (0..c.node_count())
            .map(|i| c.choice_count(i))
            .sum::<usize>()
    };
    assert!(space(&small) < space(&cfn));
}

#[test]
fn prob4_leaves_one_seat_empty() {
    let p = builtin_problem(Builtin::Prob4);
    assert_eq!(
        (p.guest_count(), p.seat_count(), p.tables().len()),
        (25, 26, 5)
    );
}

#[test]
fn short_trajectories_solve_the_small_problems() {
    for (b, optimum) in [(Builtin::Prob1, -15.0), (Builtin::Prob2, -40.0)] {
        let (_, cfn, _) = compiled(b);
        for seed in 0..10 {
            let c = McConfig::for_problem(&cfn, 1_000, seed);
            let mc = mc_solve(&cfn, &c);
            let hf = hf_solve(&cfn, &c, &HfConfig::for_schedule(&c.schedule));
            assert_eq!(
                (mc.score, mc.overlap_count),
                (optimum, 0),
                "{b} mc seed {seed}"
            );
            assert_eq!(
                (hf.score, hf.overlap_count),
                (optimum, 0),
                "{b} hf seed {seed}"
            );
        }
    }
}

#[test]
fn prob3_best_score_is_unchanged_by_longer_runs() {
    let (_, cfn, _) = compiled(Builtin::Prob3);
    let best = |steps| {
        let solver = ClassicalSolver::Mc(McConfig::for_problem(&cfn, steps, 0));
        run_replicates(&cfn, &solver, 32, 0).unwrap().best.score
    };
    let consensus = best(300_000);
    assert!((best(1_000) - consensus).abs() < 1e-9);
    assert!((best(30_000) - consensus).abs() < 1e-9);
}

#[test]
fn one_hot_sampling() {
    let (_, cfn, _) = compiled(Builtin::Prob1);
    let out = solve_via_qubo(&cfn, Encoding::OneHot, 1_000, 0).unwrap();
    assert!(out.valid_shots >= 1);
    assert_eq!(out.qubit_count, 16);
    let sampler = AnnealingSampler::default();
    let weak = solve_via_qubo_with(
        &cfn,
        &QuboSolveOptions {
            encoding: Encoding::OneHot,
            shots: 100,
            seed: 0,
            constraint_strength: Some(0.001),
            sampler: &sampler,
        },
    )
    .unwrap();
    assert!(weak.invalid_shots > weak.valid_shots, "{weak:?}");
}

#[test]
fn qubo_records_are_rescored() {
    let (_, cfn, _) = compiled(Builtin::Prob2);
    for enc in Encoding::ALL {
        let out = solve_via_qubo(&cfn, enc, 200, 3).unwrap();
        for r in &out.valid_assignments {
            assert_eq!(r.score, cfn.evaluate(&r.assignment));
            assert_eq!(r.overlap_count, cfn.count_overlaps(&r.assignment));
        }
        assert_eq!(out.valid_shots + out.invalid_shots, 200);
    }
}

#[test]
fn prob1_benchmark_matrix() {
    let problems = vec![("prob1".to_string(), builtin_problem(Builtin::Prob1))];
    let solvers: Vec<SolverSpec> = ["mc:1k", "hf:1k", "brute"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let report = run_benchmark(&problems, &solvers, 0).unwrap();
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        assert_eq!(
            (row.best_score(), row.overlap_count()),
            (Some(-15.0), Some(0)),
            "{}",
            row.solver
        );
    }
    let cfns = vec![("prob1".to_string(), compile_cfn(&problems[0].1).unwrap().0)];
    report.verify(&cfns).unwrap();
    assert_eq!(BenchmarkReport::from_tsv(&report.to_tsv()).unwrap(), report);
}

#[test]
fn weak_one_hot_row_reports_low_validity() {
    let problems = vec![("prob1".to_string(), builtin_problem(Builtin::Prob1))];
    let mut spec = SolverSpec::new(SolverKind::Qubo(Encoding::OneHot)).shots(100);
    spec.constraint_strength = Some(0.001);
    let report = run_benchmark(&problems, &[spec], 0).unwrap();
    let row = &report.rows[0];
    assert!(row.valid_fraction.unwrap() < 0.5);
    if row.valid_fraction == Some(0.0) {
        assert_eq!(row.result, CellResult::NoValidSolution);
    }
}

#[test]
fn oversized_brute_force_is_skipped() {
    let problems = vec![("prob5".to_string(), builtin_problem(Builtin::Prob5))];
    let report = run_benchmark(&problems, &["brute".parse().unwrap()], 0).unwrap();
    assert_eq!(report.rows[0].result, CellResult::Skipped);
    assert!(report.to_tsv().contains("\tskipped\t"));
}

#[test]
fn charts_are_well_formed() {
    let (p, cfn, map) = compiled(Builtin::Prob1);
    let best = brute_force_solve(&cfn, BruteForceMode::PermutationsOnly).unwrap();
    let seating = map.full_seating(&best.solutions[0].assignment);
    let svg = render_chart(&p, Some(&seating));
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(
        (root.tag_name().name(), root.attribute("version")),
        ("svg", Some("1.1"))
    );
    let class = |c: &str| {
        doc.descendants()
            .filter(|n| n.attribute("class") == Some(c))
            .count()
    };
    assert_eq!((class("seat"), class("guest"), class("overlap")), (4, 4, 0));

    let crowded = render_chart(&p, Some(&[0, 0, 1, 2]));
    let doc = roxmltree::Document::parse(&crowded).unwrap();
    assert_eq!(
        doc.descendants()
            .filter(|n| n.attribute("class") == Some("overlap"))
            .count(),
        1
    );

    let empty = render_chart(&p, None);
    let doc = roxmltree::Document::parse(&empty).unwrap();
    assert_eq!(
        doc.descendants()
            .filter(|n| n.attribute("class") == Some("guest"))
            .count(),
        0
    );

    for b in Builtin::ALL {
        let (p, cfn, map) = compiled(b);
        let out = mc_solve(&cfn, &McConfig::for_problem(&cfn, 2_000, 1));
        let svg = render_chart(&p, Some(&map.full_seating(&out.assignment)));
        roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(
            svg,
            render_chart(&p, Some(&map.full_seating(&out.assignment)))
        );
    }
}

#[test]
fn approx_binary_ground_states_of_prob1() {
    // The quadratic fit cannot represent the overlap indicator on two-bit
    // codes, so four overlapping seatings tie with the eight optima.
    use seatopt::qubo::{decode_bits, encode_approx_binary, qubo_energy};
    let (_, cfn, _) = compiled(Builtin::Prob1);
    let (q, map, residual) = encode_approx_binary(&cfn);
    assert!(residual > 0.0);
    let scored: Vec<(f64, Assignment)> = (0u32..256)
        .map(|x| {
            let bits: Vec<bool> = (0..8).map(|k| (x >> k) & 1 == 1).collect();
            (
                qubo_energy(&q, &bits),
                decode_bits(&map, &bits).unwrap().valid().unwrap(),
            )
        })
        .collect();
    let ground = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let ground_states: Vec<&Assignment> = scored
        .iter()
        .filter(|s| (s.0 - ground).abs() < 1e-9)
        .map(|s| &s.1)
        .collect();
    assert_eq!(ground_states.len(), 12);
    let optimal = ground_states
        .iter()
        .filter(|a| cfn.evaluate(a) == -15.0)
        .count();
    assert_eq!(optimal, 8);
    assert!(ground_states
        .iter()
        .filter(|a| cfn.evaluate(a) != -15.0)
        .all(|a| cfn.count_overlaps(a) > 0));
}
