use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dziobek_bench::perturbed_square;
use dziobek_core::solver::cc_jacobian;
use dziobek_core::*;

fn kernels(c: &mut Criterion) {
    let a = PotentialParam::NEWTON;
    let (x0, m) = perturbed_square(0.05);
    let (exact, _) = perturbed_square(0.0);
    let opts = SolveOptions::for_bodies(4);
    let tols = Tolerances::default();

    c.bench_function("jacobian n=4", |b| {
        b.iter(|| cc_jacobian(black_box(&x0), &m, a))
    });
    c.bench_function("newton n=4", |b| {
        b.iter(|| newton_solve(black_box(&x0), &m, a, &opts))
    });
    c.bench_function("certify n=4", |b| {
        b.iter(|| certify(black_box(&exact), &m, a, &tols))
    });
}

fn enumeration(c: &mut Criterion) {
    let m = validate_masses(&[0.2, 0.3, 0.5]).unwrap();
    let opts = SolveOptions {
        starts: 200,
        ..SolveOptions::for_bodies(3)
    };
    let mut group = c.benchmark_group("multistart");
    group.sample_size(20);
    group.bench_function("n=3, 200 starts", |b| {
        b.iter(|| multistart_solve(black_box(&m), PotentialParam::NEWTON, &opts))
    });
    group.finish();
}

criterion_group!(benches, kernels, enumeration);
criterion_main!(benches);
