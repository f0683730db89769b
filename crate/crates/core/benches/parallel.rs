//! Rayon pool vs a single worker on the batch workloads.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gte_core::ensemble::{sample_batch, EnsembleKind, EnsembleSpec};
use gte_core::invariant::{evaluate_tensor, melon_graph, MelonStyle};
use gte_core::par;
use rayon::ThreadPoolBuilder;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if all > 1 {
        out.push((format!("{all}-threads"), ThreadPoolBuilder::new().num_threads(all).build().unwrap()));
    }
    out
}

fn sampling(c: &mut Criterion) {
    let spec = EnsembleSpec::new(EnsembleKind::Gote, 4, 3, 0.0, 1.0, 0).unwrap();
    let mut group = c.benchmark_group("sample_batch gote p=4 N=3 x2000");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(sample_batch(&spec, 2000).unwrap())))
        });
    }
    group.finish();
}

fn invariants(c: &mut Criterion) {
    let spec = EnsembleSpec::new(EnsembleKind::Gote, 5, 3, 0.0, 1.0, 1).unwrap();
    let tensors = sample_batch(&spec, 500).unwrap();
    let melon = melon_graph(5, MelonStyle::Real).unwrap();
    let mut group = c.benchmark_group("melon p=5 N=3 x500");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(par::map_slice(&tensors, |t| evaluate_tensor(&melon, t).unwrap()))))
        });
    }
    group.finish();
}

criterion_group!(benches, sampling, invariants);
criterion_main!(benches);
