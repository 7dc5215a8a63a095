use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quasirand::generate::{generate_gnp, hub_weighted};
use quasirand::inclusion::{exact_rank, InclusionMatrix};
use quasirand::pattern::{count_induced, count_labeled};
use quasirand::reconstruct::{default_delta_tol, reconstruct};
use quasirand::{conjugate, PatternGraph};

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("counting");
    for n in [40usize, 80] {
        let g = generate_gnp(n, 0.5, 1).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let p3 = PatternGraph::builtin("path3").unwrap();
        let c4 = PatternGraph::builtin("cycle4").unwrap();
        group.bench_with_input(BenchmarkId::new("induced_path3", n), &n, |b, _| {
            b.iter(|| count_induced(black_box(&g), &p3, &all).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("labeled_cycle4", n), &n, |b, _| {
            b.iter(|| count_labeled(black_box(&g), &c4, &all).unwrap())
        });
    }
    group.finish();
}

fn conjugate_solver(c: &mut Criterion) {
    let patterns = ["path3", "cycle4", "star:3", "cycle:5"].map(|s| PatternGraph::builtin(s).unwrap());
    c.bench_function("conjugate_grid", |b| {
        b.iter(|| {
            for h in &patterns {
                for i in 1..100 {
                    black_box(conjugate(h, i as f64 / 100.0, 1e-12).unwrap());
                }
            }
        })
    });
}

fn inclusion_rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_rank");
    for (r, h) in [(7usize, 3usize), (9, 4), (9, 5)] {
        let a = InclusionMatrix::new(r, h).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("r{r}_h{h}")), &a, |b, a| {
            b.iter(|| exact_rank(black_box(a)))
        });
    }
    group.finish();
}

fn reconstruction(c: &mut Criterion) {
    let c4 = PatternGraph::builtin("cycle4").unwrap();
    let (w, _) = hub_weighted(6, &c4, 0.3).unwrap();
    let tol = default_delta_tol(&c4, 0.3);
    c.bench_function("reconstruct_hub6_cycle4", |b| {
        b.iter(|| reconstruct(black_box(&w), &c4, 0.3, 0.01, tol).unwrap())
    });
}

criterion_group!(benches, counting, conjugate_solver, inclusion_rank, reconstruction);
criterion_main!(benches);
