use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use terralabel::forest::{predict_raster, train_forest, ForestParams, Samples, TrainingMeta};
use terralabel::raster::{resample_bilinear, resample_nearest};
use terralabel::synth::{gen_scene, gen_truth};
use terralabel::{Scene, Taxonomy, N_BANDS};
use terralabel_bench::fixture;

fn resampling(c: &mut Criterion) {
    let (_, truth, layers) = fixture(384, 1).unwrap();
    let target = *truth.spec();
    let mut g = c.benchmark_group("resample");
    g.bench_function("bilinear_20m_to_10m", |b| {
        b.iter(|| resample_bilinear(black_box(&layers.bands[5]), &target).unwrap())
    });
    g.bench_function("nearest_20m_to_10m", |b| {
        b.iter(|| resample_nearest(black_box(&layers.scl), &target).unwrap())
    });
    g.finish();
}

fn training(c: &mut Criterion) {
    let (_, truth, layers) = fixture(192, 2).unwrap();
    // Every ninth pixel as a training sample.
    let n = truth.codes().len();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in (0..n).step_by(9) {
        for band in layers.bands.iter().take(4) {
            x.push(band.value(i) as f32);
        }
        y.push(truth.get(i));
    }
    let samples = Samples::new(&x, &y, 4).unwrap();
    let mut g = c.benchmark_group("train_forest");
    g.sample_size(10);
    for trees in [1usize, 10] {
        let params = ForestParams {
            n_trees: trees,
            features_per_split: 2,
            ..ForestParams::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(trees), &params, |b, p| {
            b.iter(|| train_forest(&samples, p, 7, TrainingMeta::default()).unwrap())
        });
    }
    g.finish();
}

fn prediction(c: &mut Criterion) {
    let (_, truth, layers) = fixture(192, 3).unwrap();
    let spec = *truth.spec();
    let bands: Vec<_> = layers
        .bands
        .iter()
        .map(|b| if b.spec() == &spec { b.clone() } else { resample_bilinear(b, &spec).unwrap() })
        .collect();
    let scl = resample_nearest(&layers.scl, &spec).unwrap();
    let cloud = resample_nearest(&layers.cloud_conf, &spec).unwrap();
    let scene = Scene::new("B", "T", layers.datetime, &bands, &scl, cloud).unwrap();

    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in (0..spec.len()).step_by(9) {
        if let Some(f) = scene.features(i) {
            x.extend_from_slice(f);
            y.push(truth.get(i));
        }
    }
    let samples = Samples::new(&x, &y, N_BANDS).unwrap();
    let model = train_forest(&samples, &ForestParams::default(), 1, TrainingMeta::default()).unwrap();
    let tax = Taxonomy::default();
    let mut g = c.benchmark_group("predict_raster");
    g.sample_size(10);
    g.bench_function("192x192", |b| b.iter(|| predict_raster(&model, black_box(&scene), &tax).unwrap()));
    g.finish();
}

fn synthesis(c: &mut Criterion) {
    let (spec, truth, _) = fixture(384, 4).unwrap();
    let mut g = c.benchmark_group("synth");
    g.sample_size(10);
    g.bench_function("gen_truth_384", |b| b.iter(|| gen_truth(black_box(&spec)).unwrap()));
    g.bench_function("gen_scene_384", |b| b.iter(|| gen_scene(&truth, black_box(&spec), 0).unwrap()));
    g.finish();
}

criterion_group!(benches, resampling, training, prediction, synthesis);
criterion_main!(benches);
