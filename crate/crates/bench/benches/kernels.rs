use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use supratoa_core::kernel_solver::solve_kernel_general;
use supratoa_core::numerics::{apply_kernel, hyper0f1, FloatKernel};
use supratoa_core::transforms::wigner_transform;
use supratoa_core::{BumpProfile, KernelRequest, Potential, QPoly, QuadSpec, Rational};

fn quartic_mix() -> Potential {
    let r = |n, d| Rational::new(n, d).unwrap();
    Potential::new(QPoly::from_terms([(2, r(1, 2)), (3, r(-1, 3)), (4, r(1, 4))]))
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_kernel_general");
    for jmax in [4u32, 8, 12] {
        let req = KernelRequest::new(quartic_mix(), Rational::one(), jmax);
        g.bench_with_input(BenchmarkId::from_parameter(jmax), &req, |b, req| {
            b.iter(|| solve_kernel_general(black_box(req)).unwrap())
        });
    }
    g.finish();
}

fn transform(c: &mut Criterion) {
    let k = solve_kernel_general(&KernelRequest::new(quartic_mix(), Rational::one(), 10)).unwrap();
    c.bench_function("wigner_transform/jmax10", |b| {
        b.iter(|| wigner_transform(black_box(&k)))
    });
}

fn hyper(c: &mut Criterion) {
    let mut g = c.benchmark_group("hyper0f1");
    for z in [-0.5, -20.0, -48.0, -400.0] {
        g.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| {
            b.iter(|| hyper0f1(black_box(z), 1e-16).unwrap())
        });
    }
    g.finish();
}

fn apply(c: &mut Criterion) {
    let one = Rational::one();
    let k = solve_kernel_general(&KernelRequest::new(Potential::harmonic(&one, &one), one, 12)).unwrap();
    let fk = FloatKernel::from(&k);
    let phi = BumpProfile::real(0.0, 0.5).unwrap();
    let grid: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
    let quad = QuadSpec::new(1e-10);
    c.bench_function("apply_kernel/harmonic_21pts", |b| {
        b.iter(|| apply_kernel(&fk, &phi, black_box(&grid), 1.0, &quad).unwrap())
    });
}

criterion_group!(benches, solve, transform, hyper, apply);
criterion_main!(benches);
