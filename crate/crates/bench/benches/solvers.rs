use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seatopt::qubo::{encode, sample_qubo, Encoding};
use seatopt::solvers::{mc_solve, McConfig};
use seatopt::{Assignment, Builtin};
use seatopt_bench::compiled;

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for which in [Builtin::Prob3, Builtin::Prob5] {
        let p = compiled(which);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Assignment::new(
            (0..p.node_count())
                .map(|i| rng.random_range(0..p.choice_count(i)))
                .collect(),
        );
        group.bench_with_input(BenchmarkId::new("full", which), &a, |b, a| {
            b.iter(|| p.evaluate(black_box(a)))
        });
        group.bench_with_input(BenchmarkId::new("delta", which), &a, |b, a| {
            b.iter(|| p.delta_evaluate(black_box(a), 0, 1))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_10k_steps");
    for which in [Builtin::Prob1, Builtin::Prob4, Builtin::Prob5] {
        let p = compiled(which);
        let config = McConfig::for_problem(&p, 10_000, 7);
        group.bench_function(which.name(), |b| {
            b.iter(|| mc_solve(&p, black_box(&config)))
        });
    }
    group.finish();
}

fn encoding(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode");
    let p = compiled(Builtin::Prob3);
    for enc in Encoding::ALL {
        group.bench_function(enc.short_name(), |b| {
            b.iter(|| encode(&p, enc, None).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_100_shots");
    group.sample_size(10);
    for which in [Builtin::Prob1, Builtin::Prob2] {
        let (q, _, _) = encode(&compiled(which), Encoding::ApproxBinary, None).unwrap();
        group.bench_function(which.name(), |b| {
            b.iter(|| sample_qubo(&q, 100, 200, 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, evaluation, monte_carlo, encoding, sampling);
criterion_main!(benches);
