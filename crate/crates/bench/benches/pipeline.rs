use arousal_bench::{noise_epoch, random_rows};
use arousal_core::classifier::{fit_tree, TrainParams};
use arousal_core::features::extract_epoch;
use arousal_core::scoring::{auprc, auroc};
use arousal_core::FeatureConfig;
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bench_feature_extraction(c: &mut Criterion) {
    let epoch = noise_epoch(1);
    let cfg = FeatureConfig::default();
    c.bench_function("extract_epoch_428", |b| {
        b.iter(|| extract_epoch(black_box(&epoch), 200.0, &cfg).unwrap())
    });
}

fn bench_tree_fit(c: &mut Criterion) {
    let (rows, labels) = random_rows(2, 120, 428);
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let params = TrainParams::default();
    c.bench_function("fit_tree_120x428", |b| {
        b.iter(|| fit_tree(black_box(&refs), black_box(&labels), &params).unwrap())
    });
}

fn bench_metrics(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.1)).collect();
    c.bench_function("auprc_100k", |b| {
        b.iter(|| auprc(black_box(&scores), black_box(&labels)).unwrap())
    });
    c.bench_function("auroc_100k", |b| {
        b.iter(|| auroc(black_box(&scores), black_box(&labels)).unwrap())
    });
}

criterion_group!(benches, bench_feature_extraction, bench_tree_fit, bench_metrics);
criterion_main!(benches);
