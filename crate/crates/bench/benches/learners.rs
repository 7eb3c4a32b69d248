use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairdrop_core::cohort::{engineer_features, Design, FeatureConfig, RobustScaler};
use fairdrop_core::learners::{class_weights, grid_search_cv, train_gbt, train_lr, GbtParams, HyperGrid, LrParams};
use fairdrop_core::synth::{default_profile, generate};
use fairdrop_core::{FeatureSet, Format, ModelKind};

struct Data {
    scaled: Design,
    raw: Design,
    y: Vec<f64>,
    w: Vec<f64>,
}

fn data(n: usize) -> Data {
    let mut profile = default_profile(Format::Online);
    profile.n = n;
    profile.seed = 11;
    let cohort = generate(&profile).expect("synthetic cohort");
    let m = engineer_features(
        &cohort.students,
        &cohort.courses,
        FeatureSet::Aware,
        &FeatureConfig::default(),
        None,
    )
    .expect("features");
    let scaled = RobustScaler::fit(&m).apply(&m).expect("scale");
    Data {
        scaled: scaled.design(false),
        raw: m.design(true),
        y: m.labels_f64(),
        w: class_weights(&m.labels).expect("weights"),
    }
}

fn bench_lr(c: &mut Criterion) {
    let mut g = c.benchmark_group("lr_fit");
    g.sample_size(10);
    for n in [2_000, 10_000] {
        let d = data(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter(|| train_lr(&d.scaled, &d.y, &d.w, &LrParams::with_l2(1.0)).unwrap())
        });
    }
    g.finish();
}

fn bench_gbt(c: &mut Criterion) {
    let mut g = c.benchmark_group("gbt_fit_100_trees");
    g.sample_size(10);
    let d = data(10_000);
    for depth in [3, 6] {
        let p = GbtParams {
            max_depth: depth,
            ..GbtParams::default()
        };
        g.bench_with_input(BenchmarkId::new("depth", depth), &p, |b, p| {
            b.iter(|| train_gbt(&d.raw, &d.y, &d.w, p, 1).unwrap())
        });
    }
    g.finish();
}

fn bench_cv(c: &mut Criterion) {
    let mut g = c.benchmark_group("cv");
    g.sample_size(10);
    let d = data(5_000);
    let grid = HyperGrid {
        gbt_trees: vec![50, 100],
        gbt_depth: vec![3],
        gbt_learning_rate: vec![0.1],
        gbt_min_child_weight: vec![1.0],
        ..HyperGrid::default()
    };
    g.bench_function("gbt_small_grid_3_fold", |b| {
        b.iter(|| grid_search_cv(&d.raw, &d.y, &d.w, ModelKind::Gbt, &grid, 3, 5).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_lr, bench_gbt, bench_cv);
criterion_main!(benches);
