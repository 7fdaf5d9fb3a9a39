use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random forest hyper-parameters. Defaults follow the common toolkit
/// defaults: 10 trees grown to purity on bootstrap resamples, Gini, and
/// `floor(sqrt(10)) = 3` candidate features per split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 10,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: 3,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Argument("n_trees must be at least 1".into()));
        }
        if self.features_per_split == 0 || self.features_per_split > n_features {
            return Err(Error::Argument(format!(
                "features_per_split must lie in [1, {n_features}], got {}",
                self.features_per_split
            )));
        }
        if self.n_trees > u32::MAX as usize || self.min_samples_split > u32::MAX as usize {
            return Err(Error::Argument("forest parameters exceed 32 bits".into()));
        }
        if self.max_depth.is_some_and(|d| d > u32::MAX as usize) {
            return Err(Error::Argument("max_depth exceeds 32 bits".into()));
        }
        Ok(())
    }
}
