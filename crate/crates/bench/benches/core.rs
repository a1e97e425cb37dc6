use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sizeclust_bench::{draws, survey};
use sizeclust_core::model::GibbsChain;
use sizeclust_core::{
    aitchison_distance, min_perm_aitchison, optimize_assignment, vi_loss, Assignment, Composition, ExpectedLoss,
    LossSpec, OptimizerConfig, SamplerConfig,
};

/// Deterministic spread of labels.
fn labels(n: usize, k: usize, step: usize) -> Vec<usize> {
    (0..n).map(|i| (i * step + i / 3) % k).collect()
}

fn information(c: &mut Criterion) {
    let a = Assignment::new(labels(200, 4, 7), 4).unwrap();
    let z = Assignment::new(labels(200, 5, 3), 5).unwrap();
    c.bench_function("vi_loss n=200", |b| b.iter(|| vi_loss(black_box(&a), black_box(&z)).unwrap()));
}

fn composition(c: &mut Criterion) {
    let x = Composition::new(vec![0.1, 0.2, 0.3, 0.15, 0.25, 0.05]).unwrap();
    let y = Composition::new(vec![0.3, 0.1, 0.2, 0.05, 0.15, 0.2]).unwrap();
    c.bench_function("aitchison D=6", |b| b.iter(|| aitchison_distance(black_box(&x), black_box(&y)).unwrap()));
    c.bench_function("min_perm_aitchison D=6", |b| {
        b.iter(|| min_perm_aitchison(black_box(&x), black_box(&y)).unwrap())
    });
}

fn expected_loss(c: &mut Criterion) {
    let zs = draws(3, 500);
    let spec = LossSpec::balanced(3).unwrap();
    let objective = ExpectedLoss::new(&zs, &spec).unwrap();
    let action: Vec<usize> = labels(20, 3, 1);
    c.bench_function("expected_loss T=1000 N=20", |b| b.iter(|| objective.evaluate(black_box(&action)).unwrap()));
}

fn sampler(c: &mut Criterion) {
    let (data, truth) = survey(5);
    let prior = truth.informed_prior(0.5, 0.0, 5).unwrap();
    let mut chain = GibbsChain::new(&data, &prior, SamplerConfig::default().chain_rng(0)).unwrap();
    c.bench_function("gibbs sweep N=20 Q=10 K=3", |b| b.iter(|| chain.sweep()));
}

fn optimizer(c: &mut Criterion) {
    let zs = draws(7, 100);
    let spec = LossSpec::balanced(3).unwrap();
    let cfg = OptimizerConfig {
        population_size: 100,
        max_generations: 30,
        wait_generations: 5,
        ..OptimizerConfig::default()
    };
    let mut group = c.benchmark_group("optimizer");
    group.sample_size(10);
    group.bench_function("genetic pop=100 T=200 N=20", |b| b.iter(|| optimize_assignment(&zs, &spec, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, information, composition, expected_loss, sampler, optimizer);
criterion_main!(benches);
