use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ordgeo::bits::BitSet;
use ordgeo::fld::{self, ReconstructConfig};
use ordgeo::hausdorff::{greedy_cover, GreedyOptions};
use ordgeo::OrderMode;
use ordgeo_bench::{exact_sigma, sprinkle_2d};

fn closure(c: &mut Criterion) {
    let mut g = c.benchmark_group("transitive_closure");
    for n in [500, 2000] {
        let hasse = sprinkle_2d(n, 1).relation(OrderMode::Causal).transitive_reduction().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &hasse, |b, r| b.iter(|| black_box(r.transitive_closure().unwrap())));
    }
    g.finish();
}

fn reconstruct(c: &mut Criterion) {
    let mut g = c.benchmark_group("reconstruct_sigma");
    g.sample_size(10);
    for n in [300, 1000] {
        let space = sprinkle_2d(n, 2);
        let cfg = ReconstructConfig::default();
        g.bench_with_input(BenchmarkId::from_parameter(n), &space, |b, s| b.iter(|| black_box(fld::reconstruct_sigma(s, &cfg).unwrap())));
    }
    g.finish();
}

fn midpoint(c: &mut Criterion) {
    let mut g = c.benchmark_group("continuum_midpoint_ratio");
    g.sample_size(10);
    for d in [2, 3] {
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| {
            b.iter(|| black_box(fld::continuum_midpoint_ratio(d, 100_000, 8, 3).unwrap()))
        });
    }
    g.finish();
}

fn greedy(c: &mut Criterion) {
    let mut g = c.benchmark_group("greedy_cover");
    g.sample_size(10);
    let space = sprinkle_2d(1000, 4);
    let sigma = exact_sigma(&space);
    let target = BitSet::full(space.len());
    let opts = GreedyOptions::default();
    for delta in [0.4, 0.2] {
        g.bench_with_input(BenchmarkId::from_parameter(delta), &delta, |b, &delta| {
            b.iter(|| black_box(greedy_cover(&space, &target, delta, &sigma, 2.0, &opts).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, closure, reconstruct, midpoint, greedy);
criterion_main!(benches);
