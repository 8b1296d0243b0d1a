use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};

use relaxwave_bench::{ansatz, design, euler, setup};
use relaxwave_core::solver::cfl_dt;
use relaxwave_core::waves::profile::shock_profile;
use relaxwave_core::{build_fan, Scheme};

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for cells in [2000usize, 8000] {
        let base = setup(cells);
        group.throughput(Throughput::Elements(cells as u64));
        for scheme in [Scheme::Order1, Scheme::Order2] {
            let mut s = base.clone();
            s.solver.config.scheme = scheme;
            let dt = cfl_dt(&s.state, s.solver.config.cfl);
            group.bench_with_input(BenchmarkId::new(format!("{scheme:?}"), cells), &cells, |b, _| {
                b.iter_batched_ref(
                    || s.state.clone(),
                    |state| s.solver.clone().step(state, dt).unwrap(),
                    BatchSize::LargeInput,
                )
            });
        }
    }
    group.finish();
}

fn profile(c: &mut Criterion) {
    let m = euler();
    let mut group = c.benchmark_group("profile");
    group.sample_size(20);
    for strength in [0.025, 0.05, 0.1] {
        let fan = build_fan(&m, &design(strength)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(strength), &fan, |b, fan| {
            b.iter(|| shock_profile(&m, 0.18, black_box(fan), 0).unwrap())
        });
    }
    group.finish();
}

fn ansatz_eval(c: &mut Criterion) {
    let an = ansatz(0.05);
    let xs: Vec<f64> = (0..1000).map(|k| -100.0 + 0.2 * k as f64).collect();
    let mut group = c.benchmark_group("ansatz");
    group.throughput(Throughput::Elements(xs.len() as u64));
    group.bench_function("u", |b| {
        b.iter(|| xs.iter().map(|&x| an.u(black_box(x), 50.0)[0]).sum::<f64>())
    });
    group.bench_function("uv", |b| {
        b.iter(|| xs.iter().map(|&x| an.uv(black_box(x), 50.0).1[0]).sum::<f64>())
    });
    group.bench_function("e1", |b| {
        b.iter(|| xs.iter().map(|&x| an.e1(black_box(x), 50.0)[0]).sum::<f64>())
    });
    group.finish();
}

criterion_group!(benches, step, profile, ansatz_eval);
criterion_main!(benches);
