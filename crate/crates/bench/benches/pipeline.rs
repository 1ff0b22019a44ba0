use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use semibif_core::analysis::{analyze, build_nonlinearity, AnalysisInput};
use semibif_core::fixtures::lookup;
use semibif_core::problem::locate_landmarks;
use semibif_core::timemap::{time_map, time_map_derivative, DEFAULT_TOL};
use semibif_core::tracer::{trace, Spacing};

fn input(name: &str) -> AnalysisInput {
    AnalysisInput::from_fixture(lookup(name).expect("fixture exists"))
}

fn time_map_eval(c: &mut Criterion) {
    let mut g = c.benchmark_group("time_map");
    for name in ["E1", "E4", "E7"] {
        let nl = build_nonlinearity(&input(name)).unwrap();
        let lm = locate_landmarks(&nl).unwrap();
        let eta = lm.eta.unwrap();
        let alpha = if lm.beta2_is_finite() { 0.5 * (eta + lm.beta2) } else { 2.0 * eta };
        g.bench_function(format!("T/{name}"), |b| {
            b.iter(|| time_map(&nl, &lm, black_box(alpha), DEFAULT_TOL).unwrap())
        });
        g.bench_function(format!("T_prime/{name}"), |b| {
            b.iter(|| time_map_derivative(&nl, &lm, black_box(alpha), DEFAULT_TOL).unwrap())
        });
    }
    g.finish();
}

fn full_analysis(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze");
    g.sample_size(10);
    for name in ["E1", "E3", "E7"] {
        let inp = input(name);
        g.bench_function(name, |b| b.iter(|| analyze(black_box(&inp)).unwrap()));
    }
    g.finish();
}

fn curve_trace(c: &mut Criterion) {
    let mut g = c.benchmark_group("trace");
    g.sample_size(10);
    for name in ["E1", "E7"] {
        let nl = build_nonlinearity(&input(name)).unwrap();
        let lm = locate_landmarks(&nl).unwrap();
        g.bench_function(format!("{name}/64"), |b| {
            b.iter(|| trace(&nl, &lm, 64, Spacing::GeometricNearEndpoints, DEFAULT_TOL).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, time_map_eval, full_analysis, curve_trace);
criterion_main!(benches);
