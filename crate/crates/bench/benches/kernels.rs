use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mflab_bench::{Fixture, SIZES};
use mflab_core::condensate::occupation_weights;
use mflab_core::propagate::krylov_step;
use mflab_core::reduce::{gamma1, gamma2};

fn fixtures() -> Vec<(String, Fixture)> {
    SIZES.iter().map(|&(m, n)| (format!("M{m}N{n}"), Fixture::new(m, n))).collect()
}

fn kernels(c: &mut Criterion) {
    let fx = fixtures();

    let mut group = c.benchmark_group("matvec");
    for (name, f) in &fx {
        let x = f.state.amplitudes().to_vec();
        let mut y = vec![Default::default(); f.dim()];
        group.bench_with_input(BenchmarkId::from_parameter(name), f, |b, f| {
            b.iter(|| f.hamiltonian.matvec_into(black_box(&x), &mut y))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("krylov_step");
    for (name, f) in &fx {
        group.bench_with_input(BenchmarkId::from_parameter(name), f, |b, f| {
            b.iter(|| krylov_step(&f.hamiltonian, black_box(f.state.amplitudes()), 1e-2, 40, 1e-10).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("reduced_density");
    group.sample_size(20);
    for (name, f) in &fx {
        group.bench_with_input(BenchmarkId::new("gamma1", name), f, |b, f| b.iter(|| gamma1(black_box(&f.state)).unwrap()));
        group.bench_with_input(BenchmarkId::new("gamma2", name), f, |b, f| b.iter(|| gamma2(black_box(&f.state)).unwrap()));
    }
    group.finish();

    let mut group = c.benchmark_group("occupation_weights");
    group.sample_size(20);
    for (name, f) in &fx {
        group.bench_with_input(BenchmarkId::from_parameter(name), f, |b, f| {
            b.iter(|| occupation_weights(black_box(&f.state), &f.orbital).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
