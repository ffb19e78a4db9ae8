use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use walker_bench::{impacting_start, tracking_scenario};
use walker_core::dmoc::{assemble_nlp, solve, SolverConfig};
use walker_core::integrator::{init_from_velocity, simulate_hybrid, step, IntegratorConfig, ZeroControl};
use walker_core::model::{ControlInput, WalkerParams};

fn integrator(c: &mut Criterion) {
    let p = WalkerParams::standard();
    let cfg = IntegratorConfig::with_step(0.01).unwrap();
    let (q0, v0) = impacting_start();
    let z = ControlInput::ZERO;
    let q1 = init_from_velocity(&p, &cfg, q0, v0, &z).unwrap();
    c.bench_function("del_step", |b| b.iter(|| step(&p, &cfg, black_box(q0), black_box(q1), &z, &z).unwrap()));
    c.bench_function("simulate_hybrid_100_steps", |b| {
        b.iter(|| simulate_hybrid(&p, &cfg, black_box(q0), v0, &mut ZeroControl, 100).unwrap())
    });
}

fn dmoc(c: &mut Criterion) {
    let pb = tracking_scenario();
    let nlp = assemble_nlp(&pb, &[]).unwrap();
    let z = DVector::from_fn(nlp.n_vars(), |i, _| 0.01 * i as f64);
    c.bench_function("constraint_jacobian_n80", |b| b.iter(|| nlp.constraint_jacobian(black_box(&z))));
    let mut group = c.benchmark_group("sqp");
    group.sample_size(10);
    group.bench_function("solve_tracking_scenario", |b| b.iter(|| solve(&pb, &SolverConfig::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, integrator, dmoc);
criterion_main!(benches);
