use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linsys_quanta::classical::compute_modes;
use linsys_quanta::hermite::{evaluate_box, HermiteContext};
use linsys_quanta::linalg::CMatrix;
use linsys_quanta::riccati::{integrate_riccati, select_modes};
use linsys_quanta::states::{build_basis, spectrum};
use linsys_quanta::verify::{eigen_residual, Grid};
use linsys_quanta_bench::chain;
use num_complex::Complex64;
use std::hint::black_box;

fn modes(c: &mut Criterion) {
    let mut g = c.benchmark_group("modes");
    for n in [2, 4, 8] {
        let nf = chain(n, 0.3);
        g.bench_with_input(BenchmarkId::new("compute_modes", n), &nf, |b, nf| {
            b.iter(|| compute_modes(black_box(nf)).unwrap())
        });
        let ms = compute_modes(&nf).unwrap();
        g.bench_with_input(BenchmarkId::new("select_modes", n), &ms, |b, ms| {
            b.iter(|| select_modes(black_box(ms), 1.0).unwrap())
        });
    }
    g.finish();
}

fn riccati(c: &mut Criterion) {
    let mut g = c.benchmark_group("riccati");
    for n in [1, 3, 6] {
        let nf = chain(n, 0.3);
        let k0 = CMatrix::identity(n, n);
        g.bench_with_input(BenchmarkId::new("integrate_1000_steps", n), &nf, |b, nf| {
            b.iter(|| integrate_riccati(&k0, black_box(nf), (0.0, 1.0), 1e-3).unwrap())
        });
    }
    g.finish();
}

fn hermite(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermite");
    for (n, order) in [(1, 20), (2, 10), (3, 6)] {
        let gamma = CMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { 2.0 } else { 0.3 }, 0.1));
        let ctx = HermiteContext::new(gamma).unwrap();
        let x = vec![Complex64::new(0.4, -0.2); n];
        let max = vec![order; n];
        g.bench_function(BenchmarkId::new("evaluate_box", format!("{n}d_order{order}")), |b| {
            b.iter(|| evaluate_box(&ctx, black_box(&max), black_box(&x)).unwrap())
        });
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let nf = chain(2, 0.3);
    let ms = compute_modes(&nf).unwrap();
    let gs = select_modes(&ms, 1.0).unwrap();
    let basis = build_basis(&ms, &gs.shape.selection, &gs.shape.k0, 1.0, 1.0).unwrap();
    let states = spectrum(&basis, 1).unwrap();
    let grid = Grid::auto(&basis.ground, 1, Some(101)).unwrap();
    c.bench_function("verify/eigen_residual_2d_101", |b| {
        b.iter(|| eigen_residual(&nf, &basis, black_box(&states[1]), &grid).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = modes, riccati, hermite, grid
}
criterion_main!(benches);
