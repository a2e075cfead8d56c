use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use svilab_bench::{affine, table_game};
use svilab_core::extragradient::run_extragradient;
use svilab_core::oracle::SampleStream;
use svilab_core::vs_ave::run_vs_ave;
use svilab_core::{BudgetCounter, ExtragradientConfig, FeasibleSet, QRule, TraceOptions, Vector, VsAveConfig};

fn projections(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    for n in [10usize, 100, 1000] {
        let v = Vector::from_fn(n, |i, _| ((i * 7919) % 101) as f64 / 50.0 - 1.0);
        let simplex = FeasibleSet::simplex(n).unwrap();
        let ball = FeasibleSet::ball(Vector::zeros(n), 1.0).unwrap();
        group.bench_with_input(BenchmarkId::new("simplex", n), &v, |b, v| {
            b.iter(|| simplex.project(black_box(v)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ball", n), &v, |b, v| b.iter(|| ball.project(black_box(v)).unwrap()));
    }
    group.finish();
}

fn batch_mean(c: &mut Criterion) {
    let game = table_game();
    let z = game.feasible_set.default_point();
    let mut group = c.benchmark_group("batch_mean");
    for n in [1u64, 64, 4096] {
        group.bench_with_input(BenchmarkId::new("bimatrix_20x10", n), &n, |b, &n| {
            let mut stream = SampleStream::new(1, 2);
            let mut budget = BudgetCounter::unlimited();
            b.iter(|| game.oracle.batch_mean(black_box(&z), n, &mut stream, &mut budget).unwrap())
        });
    }
    group.finish();
}

fn solver_runs(c: &mut Criterion) {
    let p = affine(50, 10.0);
    let start = p.feasible_set.default_point();
    let cfg = VsAveConfig::with_beta(1.0, 10.0, 1.001, 100, QRule::KappaPlusTwo);
    c.bench_function("vs_ave/affine_n50_k100", |b| {
        b.iter(|| run_vs_ave(&p, &start, &cfg, BudgetCounter::unlimited(), &TraceOptions::off()).unwrap())
    });

    let game = table_game();
    let z0 = game.feasible_set.default_point();
    let eg = ExtragradientConfig::for_lipschitz(7.05);
    c.bench_function("extragradient/table_game_budget_1e5", |b| {
        b.iter(|| run_extragradient(&game, &z0, &eg, BudgetCounter::new(100_000), &TraceOptions::off()).unwrap())
    });
}

criterion_group!(benches, projections, batch_mean, solver_runs);
criterion_main!(benches);
