use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Metrics};
use crate::error::{Error, Result};
use crate::forest::{predict_raster, train_on_samples, write_model, ForestParams, ScenePrediction};
use crate::labelgen::{
    build_validity_mask, filter_labels, harmonize_gl30, pick_block_candidates, scene_cloud_fraction,
    stratified_split, Split,
};
use crate::raster::{read_rbin, write_rbin, RasterGrid};
use crate::rng::{derive_seed, fnv1a, StreamTag};
use crate::scene::{Scene, SceneManifest};
use crate::taxonomy::{Taxonomy, N_CLASSES};

/// Scenes whose mean cloud confidence reaches this fraction are skipped.
pub const DEFAULT_CLOUD_THRESHOLD: f64 = 0.90;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub forest: ForestParams,
    pub cloud_threshold: f64,
    pub taxonomy: Taxonomy,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            forest: ForestParams::default(),
            cloud_threshold: DEFAULT_CLOUD_THRESHOLD,
            taxonomy: Taxonomy::default(),
        }
    }
}

/// Contents of a scene's `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneReport {
    pub scene_id: String,
    pub tile_id: String,
    pub datetime: DateTime<Utc>,
    pub cloud_fraction: f64,
    pub skipped: bool,
    pub skip_reason: Option<String>,
    pub labeled_pixels: u64,
    pub valid_pixels: u64,
    pub candidates: u64,
    pub train_counts: [u64; N_CLASSES],
    pub test_counts: [u64; N_CLASSES],
    pub accuracy: Option<f64>,
    pub metrics: Option<Metrics>,
}

impl SceneReport {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone)]
pub struct SceneResult {
    pub report: SceneReport,
    pub prediction: Option<ScenePrediction>,
    pub model_path: Option<PathBuf>,
}

impl SceneResult {
    pub fn skipped(&self) -> bool {
        self.report.skipped
    }
}

/// Per-scene seed: a pure function of the master seed and the scene id.
pub fn scene_seed(master_seed: u64, scene_id: &str) -> u64 {
    derive_seed(master_seed, StreamTag::SceneSeed, fnv1a(scene_id.as_bytes()))
}

/// Process one scene end to end and write its artifacts into `out_dir`.
///
/// Scenes at or above the cloud threshold are returned as skipped with
/// reason `"cloud"` and only `metrics.json` is written. Otherwise the
/// legacy labels are harmonized and filtered, one candidate per label cell
/// is sampled and split per class, a forest is trained on the train half,
/// scored on the test half and applied to every usable pixel.
pub fn run_scene(
    manifest: &SceneManifest,
    gl30_path: &Path,
    config: &SceneConfig,
    master_seed: u64,
    out_dir: &Path,
) -> Result<SceneResult> {
    manifest.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let cloud_fraction = scene_cloud_fraction(&read_rbin(&manifest.cloud_conf_path)?)?;
    let mut report = SceneReport {
        scene_id: manifest.scene_id.clone(),
        tile_id: manifest.tile_id.clone(),
        datetime: manifest.datetime,
        cloud_fraction,
        skipped: false,
        skip_reason: None,
        labeled_pixels: 0,
        valid_pixels: 0,
        candidates: 0,
        train_counts: [0; N_CLASSES],
        test_counts: [0; N_CLASSES],
        accuracy: None,
        metrics: None,
    };
    if cloud_fraction >= config.cloud_threshold {
        report.skipped = true;
        report.skip_reason = Some("cloud".into());
        report.write(out_dir.join("metrics.json"))?;
        return Ok(SceneResult {
            report,
            prediction: None,
            model_path: None,
        });
    }

    let seed = scene_seed(master_seed, &manifest.scene_id);
    let scene = Scene::load(manifest)?;
    let spec = *scene.spec();
    let taxonomy = &config.taxonomy;

    let gl30 = harmonize_gl30(&read_rbin(gl30_path)?, taxonomy, &spec)?;
    let scl = RasterGrid::from_u8(spec, (0..spec.len()).map(|i| scene.scl(i)).collect(), None)?;
    let labels = filter_labels(&gl30, &scl, taxonomy)?;
    let valid = build_validity_mask(&scene);
    let candidates = pick_block_candidates(&labels, &valid, seed)?;
    report.labeled_pixels = labels.labeled_count() as u64;
    report.valid_pixels = valid.count() as u64;
    report.candidates = candidates.len() as u64;

    write_rbin(&labels.to_grid(), out_dir.join("labels.rbin"))?;
    write_rbin(&valid.to_grid(), out_dir.join("valid.rbin"))?;

    if candidates.is_empty() {
        return Err(Error::Training(format!(
            "{}: no labeled valid pixels to sample",
            manifest.scene_id
        )));
    }
    let samples = stratified_split(&candidates, &scene, seed)?;
    samples.write_csv(out_dir.join("samples.csv"))?;
    report.train_counts = samples.class_counts(Split::Train);
    report.test_counts = samples.class_counts(Split::Test);

    let model = train_on_samples(&samples, &config.forest, seed, &manifest.scene_id)?;
    let model_path = out_dir.join("model.rfm");
    write_model(&model, &model_path)?;

    let (test_x, test_y) = samples.matrix(Split::Test);
    if test_y.is_empty() {
        return Err(Error::Training(format!(
            "{}: test half is empty",
            manifest.scene_id
        )));
    }
    let predicted: Vec<u8> = test_x.iter().map(|f| model.predict(f)).collect();
    let metrics = evaluate(&predicted, &test_y)?;
    report.accuracy = Some(metrics.accuracy);
    report.metrics = Some(metrics);

    let prediction = predict_raster(&model, &scene, taxonomy)?;
    prediction.write(out_dir)?;
    report.write(out_dir.join("metrics.json"))?;

    Ok(SceneResult {
        report,
        prediction: Some(prediction),
        model_path: Some(model_path),
    })
}
