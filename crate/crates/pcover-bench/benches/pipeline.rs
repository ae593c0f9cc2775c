use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pcover::lp::solve_lp;
use pcover::oracle::exact_opt;
use pcover::partition::build_natural_lp;
use pcover::rounding::{solve, RoundingConfig};
use pcover_bench::{gap, random, thin_cycle};

fn bench_natural_lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("natural_lp");
    for n in [16usize, 64, 144] {
        let inst = gap(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            let lp = build_natural_lp(inst);
            b.iter(|| solve_lp(&lp).unwrap());
        });
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let config = RoundingConfig::default();

    for n in [16usize, 64] {
        let inst = gap(n);
        group.bench_with_input(BenchmarkId::new("gap", n), &inst, |b, inst| {
            b.iter(|| solve(inst, &config).unwrap());
        });
    }
    let rnd = random(30, 20, 4, 11);
    group.bench_function("random_30x20", |b| {
        b.iter(|| solve(&rnd, &config).unwrap());
    });
    let light = thin_cycle(80, 2, 2);
    group.bench_function("thin_cycle_80", |b| {
        b.iter(|| solve(&light, &config).unwrap());
    });
    group.finish();
}

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    for m in [12usize, 16, 20] {
        let inst = random(14, m, 3, 7);
        group.bench_with_input(BenchmarkId::from_parameter(m), &inst, |b, inst| {
            b.iter(|| exact_opt(inst).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_natural_lp, bench_pipeline, bench_exact);
criterion_main!(benches);
