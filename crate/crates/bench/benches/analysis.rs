use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use obskit_bench::{ambiguity_base, ambiguity_observer, two_targets};
use obskit_core::{
    check_combined_condition, check_observable, estimate_initial_state, generate_doppler_ambiguous,
    measure_scenario, propagate_ode, transition_matrix, verify_ambiguity, DopplerAmbiguitySpec,
    Regime, SampledFunction, TimeGrid, Tolerances, Track, TransformModel,
};
use std::hint::black_box;

fn transition(c: &mut Criterion) {
    let mut group = c.benchmark_group("transition");
    for p in [1usize, 3, 5] {
        let x0 = DVector::from_element(2 * (p + 1), 1.0);
        group.bench_with_input(BenchmarkId::new("closed_form", p), &p, |b, &p| {
            b.iter(|| transition_matrix(black_box(p), 2.5, 0.0).matrix * &x0)
        });
        group.bench_with_input(BenchmarkId::new("rk4", p), &p, |b, &p| {
            b.iter(|| propagate_ode(&[p], black_box(&x0), 0.0, 2.5, 400).unwrap())
        });
    }
    group.finish();
}

fn observability(c: &mut Criterion) {
    let mut group = c.benchmark_group("observability");
    for points in [101usize, 301, 1001] {
        let s = two_targets(2, points);
        group.bench_with_input(BenchmarkId::new("check", points), &s, |b, s| {
            b.iter(|| check_observable(black_box(s), 1e-8).unwrap())
        });
    }
    group.finish();
}

fn estimation(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    for p in 0..=3usize {
        let s = two_targets(p, 301);
        let history = measure_scenario(&s).unwrap();
        let orders = s.model_orders();
        group.bench_with_input(BenchmarkId::new("two_targets", p), &p, |b, _| {
            b.iter(|| estimate_initial_state(&s.observer, black_box(&history), &orders, 1e-8).unwrap())
        });
    }
    group.finish();
}

fn ambiguity(c: &mut Criterion) {
    let grid = TimeGrid::new(0.0, 10.0, 201).unwrap();
    let observer = ambiguity_observer();
    let base = ambiguity_base();
    let tol = Tolerances::default();
    let rotation = SampledFunction::from_fn(&grid, |t| 0.3 + 0.01 * t).unwrap();
    let spec = DopplerAmbiguitySpec::new(1.1, 250.0, rotation, 1500.0).unwrap();

    c.bench_function("ambiguity/generate_doppler", |b| {
        b.iter(|| generate_doppler_ambiguous(&base, &observer, black_box(&spec), &grid, tol.eps_range).unwrap())
    });

    let gen = generate_doppler_ambiguous(&base, &observer, &spec, &grid, tol.eps_range).unwrap();
    let (ti, tj) = (Track::from(gen), Track::from(base.clone()));
    let tonals = [spec.counterpart_tonal(1000.0), 1000.0];
    c.bench_function("ambiguity/verify_combined", |b| {
        b.iter(|| verify_ambiguity(&ti, &tj, &observer, tonals, 1500.0, &grid, &tol, Regime::Combined).unwrap())
    });
    c.bench_function("ambiguity/eigen_check", |b| {
        b.iter(|| check_combined_condition(&ti, &tj, &observer, TransformModel::Spec(&spec), &grid, &tol).unwrap())
    });
}

criterion_group!(benches, transition, observability, estimation, ambiguity);
criterion_main!(benches);
