use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use terralabel::pipeline::{
    aggregate, average_accuracy, run_scene, AnnualReport, SceneConfig, SceneReport, SceneResult,
};
use terralabel::{SceneManifest, ScenePrediction, Taxonomy};

use crate::{CliError, Overrides, RunConfig};

pub const SUMMARY_FILE: &str = "summary.json";
pub const ANNUAL_DIR: &str = "annual";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene_id: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub scene_id: String,
    pub reason: String,
    pub cloud_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailEntry {
    pub scene_id: String,
    pub error: String,
}

/// Tile-level outcome, written as `summary.json`. Contains no paths or
/// worker counts so identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub scenes: Vec<SceneEntry>,
    pub average_accuracy: Option<f64>,
    pub skipped: Vec<SkipEntry>,
    pub failed: Vec<FailEntry>,
    pub annual: Option<AnnualReport>,
}

impl Summary {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
    }
}

/// Scene directories (those holding a `manifest.json`), sorted by name.
fn scene_dirs(tile_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(tile_dir)
        .map_err(|e| CliError::Missing(format!("{}: {e}", tile_dir.display())))?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("manifest.json").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn dir_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Run every scene of the configured tile, aggregate the processed ones
/// and write `summary.json`. Scene failures do not stop the other scenes;
/// they are listed in the summary and turn the result into an error.
pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<Summary, CliError> {
    let mut config = RunConfig::load(config_path)?;
    config.apply(overrides);
    let seed = config.validate()?;

    let taxonomy = match &config.taxonomy {
        Some(p) if !p.is_file() => return Err(CliError::Missing(format!("{}: no such taxonomy", p.display()))),
        Some(p) => Taxonomy::load(p).map_err(|e| CliError::Config(format!("taxonomy: {e}")))?,
        None => Taxonomy::default(),
    };
    let gl30 = config.tile_dir.join("gl30.rbin");
    if !gl30.is_file() {
        return Err(CliError::Missing(format!("{}: legacy label raster not found", gl30.display())));
    }
    let dirs = scene_dirs(&config.tile_dir)?;
    if dirs.is_empty() {
        return Err(CliError::Missing(format!("{}: no scene manifests", config.tile_dir.display())));
    }
    fs::create_dir_all(&config.output_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", config.output_dir.display())))?;

    let scene_config = SceneConfig {
        forest: config.forest,
        cloud_threshold: config.cloud_threshold,
        taxonomy,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;

    let outcomes: Vec<(String, terralabel::Result<SceneResult>)> = pool.install(|| {
        dirs.par_iter()
            .map(|dir| {
                let manifest = match SceneManifest::load(dir.join("manifest.json")) {
                    Ok(m) => m,
                    Err(e) => return (dir_name(dir), Err(e)),
                };
                let out = config.output_dir.join(&manifest.scene_id);
                let result = run_scene(&manifest, &gl30, &scene_config, seed, &out);
                (manifest.scene_id, result)
            })
            .collect()
    });

    let mut summary = Summary {
        seed,
        scenes: Vec::new(),
        average_accuracy: None,
        skipped: Vec::new(),
        failed: Vec::new(),
        annual: None,
    };
    let mut predictions = Vec::new();
    for (scene_id, outcome) in outcomes {
        match outcome {
            Ok(r) if r.skipped() => summary.skipped.push(SkipEntry {
                scene_id,
                reason: r.report.skip_reason.clone().unwrap_or_default(),
                cloud_fraction: r.report.cloud_fraction,
            }),
            Ok(r) => {
                summary.scenes.push(SceneEntry {
                    scene_id,
                    accuracy: r.report.accuracy.unwrap_or(0.0),
                });
                predictions.extend(r.prediction);
            }
            Err(e) => summary.failed.push(FailEntry {
                scene_id,
                error: e.to_string(),
            }),
        }
    }
    let accuracies: Vec<f64> = summary.scenes.iter().map(|s| s.accuracy).collect();
    summary.average_accuracy = average_accuracy(&accuracies);

    if let Some(first) = predictions.first() {
        let annual = pool.install(|| aggregate(first.spec(), &predictions))?;
        annual.write(&config.output_dir.join(ANNUAL_DIR))?;
        summary.annual = Some(annual.report());
    }
    summary.write(&config.output_dir.join(SUMMARY_FILE))?;

    if !summary.failed.is_empty() {
        let list: Vec<String> = summary
            .failed
            .iter()
            .map(|f| format!("{}: {}", f.scene_id, f.error))
            .collect();
        return Err(CliError::Runtime(format!(
            "{} scene(s) failed\n{}",
            list.len(),
            list.join("\n")
        )));
    }
    Ok(summary)
}

/// Per-scene reports found under `dir`, sorted by directory name.
pub(crate) fn scene_reports(dir: &Path) -> Result<Vec<(PathBuf, SceneReport)>, CliError> {
    let entries =
        fs::read_dir(dir).map_err(|e| CliError::Missing(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("metrics.json").is_file())
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let report = SceneReport::read(p.join("metrics.json"))?;
        out.push((p, report));
    }
    Ok(out)
}

/// Rebuild the annual label in `dir/annual` from the per-scene
/// predictions already on disk.
pub fn cmd_aggregate(dir: &Path) -> Result<AnnualReport, CliError> {
    let reports = scene_reports(dir)?;
    let mut predictions = Vec::new();
    for (path, report) in &reports {
        if report.skipped || report.accuracy.is_none() {
            continue;
        }
        predictions.push(ScenePrediction::read(path, &report.scene_id, report.datetime)?);
    }
    let Some(first) = predictions.first() else {
        return Err(CliError::Missing(format!("{}: no scene predictions", dir.display())));
    };
    let annual = aggregate(first.spec(), &predictions)?;
    annual.write(&dir.join(ANNUAL_DIR))?;
    Ok(annual.report())
}
