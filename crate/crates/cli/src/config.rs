use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use terralabel::pipeline::DEFAULT_CLOUD_THRESHOLD;
use terralabel::ForestParams;

use crate::CliError;

fn default_cloud_threshold() -> f64 {
    DEFAULT_CLOUD_THRESHOLD
}

/// Contents of a `run` config file. Relative paths are resolved against
/// the directory holding the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tile_dir: PathBuf,
    pub output_dir: PathBuf,
    /// Mandatory; there is no clock-based fallback.
    pub seed: Option<u64>,
    #[serde(default)]
    pub forest: ForestParams,
    #[serde(default = "default_cloud_threshold")]
    pub cloud_threshold: f64,
    #[serde(default)]
    pub taxonomy: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub trees: Option<usize>,
    pub cloud_threshold: Option<f64>,
    pub taxonomy: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json_str(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut config.tile_dir);
        fix(&mut config.output_dir);
        if let Some(t) = config.taxonomy.as_mut() {
            fix(t);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Missing(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json_str(&text, base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
        if let Some(n) = o.trees {
            self.forest.n_trees = n;
        }
        if let Some(t) = o.cloud_threshold {
            self.cloud_threshold = t;
        }
        if o.taxonomy.is_some() {
            self.taxonomy = o.taxonomy.clone();
        }
    }

    pub fn validate(&self) -> Result<u64, CliError> {
        let seed = self
            .seed
            .ok_or_else(|| CliError::Config("seed: a master seed is required".into()))?;
        if !(0.0..=1.0).contains(&self.cloud_threshold) {
            return Err(CliError::Config(format!(
                "cloud_threshold: must lie in [0, 1], got {}",
                self.cloud_threshold
            )));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        self.forest
            .validate(terralabel::N_BANDS)
            .map_err(|e| CliError::Config(format!("forest: {e}")))?;
        Ok(seed)
    }
}
