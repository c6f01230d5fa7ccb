use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smoothk::analysis::{annulus_pairs, chord_speed_check, oscillation_report};
use smoothk::projection::{brute_force_distance, nonexpansiveness_check, sample_boundary};
use smoothk::{build_boundary, AlphaSequence, Execution};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn projection_sweeps(c: &mut Criterion) {
    let model = build_boundary(&AlphaSequence::case_a(1.0).unwrap(), 1002).unwrap();
    let pairs = annulus_pairs(4096, 1.0, 3.0);
    let mut g = c.benchmark_group("nonexpansive_4096_pairs");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| nonexpansiveness_check(&model, black_box(&pairs), exec))
        });
    }
    g.finish();

    let samples = sample_boundary(&model, 20_000);
    let queries: Vec<_> = pairs.iter().take(256).map(|p| p.0).collect();
    let mut g = c.benchmark_group("brute_force_256x20000");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(black_box(&queries), |&q| brute_force_distance(&samples, q)))
        });
    }
    g.finish();
}

fn lemma_sweeps(c: &mut Criterion) {
    let model = build_boundary(&AlphaSequence::case_a(1.0).unwrap(), 1002).unwrap();
    let mut g = c.benchmark_group("chord_speed_a_10_1000");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| chord_speed_check(&model, [10, 1000], 1e-2, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("oscillation_a_10_1000");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| oscillation_report(&model, [10, 1000], exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, projection_sweeps, lemma_sweeps);
criterion_main!(benches);
