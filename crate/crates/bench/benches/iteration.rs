use criterion::{criterion_group, criterion_main, Criterion};
use relent_core::{
    build_a_operator, ensemble_to_state, half_step, iterate, random_npt, random_product_ensemble,
    werner_state, DensityMatrix, Dims, IterationConfig, Subsystem, WernerParameter,
};
use std::hint::black_box;

fn a_operator(c: &mut Criterion) {
    for (d1, d2) in [(2, 2), (3, 3)] {
        let dims = Dims::new(d1, d2);
        let sigma = random_npt(dims, 1).unwrap();
        let rho =
            ensemble_to_state(&random_product_ensemble(dims, dims.total().pow(2), 2).unwrap())
                .unwrap();
        c.bench_function(&format!("a_operator_{d1}x{d2}"), |b| {
            b.iter(|| build_a_operator(black_box(&sigma), black_box(&rho), 1e-9).unwrap())
        });
    }
}

fn half_steps(c: &mut Criterion) {
    for (d1, d2) in [(2, 2), (3, 3)] {
        let dims = Dims::new(d1, d2);
        let sigma = random_npt(dims, 1).unwrap();
        let e = random_product_ensemble(dims, dims.total().pow(2), 2).unwrap();
        c.bench_function(&format!("half_step_{d1}x{d2}"), |b| {
            b.iter(|| half_step(black_box(&e), &sigma, Subsystem::First, 0.5).unwrap())
        });
    }
}

fn full_runs(c: &mut Criterion) {
    let cfg = IterationConfig {
        starts: 1,
        ..IterationConfig::default()
    };
    let mut group = c.benchmark_group("iterate");
    group.sample_size(10);
    let singlet = DensityMatrix::singlet();
    group.bench_function("singlet", |b| {
        b.iter(|| iterate(black_box(&singlet), &cfg).unwrap())
    });
    let werner = werner_state(WernerParameter::new(4, -0.8).unwrap());
    group.bench_function("werner_d4_f-0.8", |b| {
        b.iter(|| iterate(black_box(&werner), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, a_operator, half_steps, full_runs);
criterion_main!(benches);
