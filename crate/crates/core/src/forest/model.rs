use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ForestParams;
use super::split::Samples;
use super::tree::{grow_tree, Tree};
use crate::error::{Error, Result};
use crate::labelgen::{SampleSet, Split};
use crate::rng::{Rng64, StreamTag};
use crate::scene::{BAND_NAMES, N_BANDS};
use crate::taxonomy::N_CLASSES;

/// Provenance recorded alongside a trained model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub scene_id: String,
    pub seed: u64,
    /// Training samples per class.
    pub class_counts: [u64; N_CLASSES],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub params: ForestParams,
    pub classes: Vec<u8>,
    pub bands: Vec<String>,
    pub meta: TrainingMeta,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Assemble a model from existing trees over the standard band order.
    pub fn from_trees(params: ForestParams, trees: Vec<Tree>, meta: TrainingMeta) -> Result<Self> {
        if trees.len() != params.n_trees {
            return Err(Error::Argument(format!(
                "model declares {} trees but holds {}",
                params.n_trees,
                trees.len()
            )));
        }
        Ok(ForestModel {
            params,
            classes: (0..N_CLASSES as u8).collect(),
            bands: BAND_NAMES.iter().map(|s| s.to_string()).collect(),
            meta,
            trees,
        })
    }

    pub fn n_features(&self) -> usize {
        self.bands.len()
    }

    /// Mean of the leaf distributions reached in every tree.
    pub fn predict_proba(&self, features: &[f32]) -> [f64; N_CLASSES] {
        let mut acc = [0.0f64; N_CLASSES];
        for tree in &self.trees {
            let d = tree.leaf_distribution(features);
            for k in 0..N_CLASSES {
                acc[k] += d[k];
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|p| *p /= n);
        acc
    }

    /// Most probable class; ties go to the lowest code.
    pub fn predict(&self, features: &[f32]) -> u8 {
        argmax(&self.predict_proba(features)) as u8
    }
}

/// Index of the largest value, first one on ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Train a forest. Tree `i` is grown on a bootstrap resample drawn from the
/// stream `(seed, TREE, i)`, which then also drives its feature draws, so
/// the result does not depend on how trees are scheduled.
pub fn train_forest(samples: &Samples<'_>, params: &ForestParams, seed: u64, meta: TrainingMeta) -> Result<ForestModel> {
    if samples.is_empty() {
        return Err(Error::Training("no training samples".into()));
    }
    params.validate(samples.n_features)?;
    let n = samples.len();
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng64::stream(seed, StreamTag::Tree, i as u64);
            let indices: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.below_usize(n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(samples, indices, params, rng)
        })
        .collect();
    Ok(ForestModel {
        params: *params,
        classes: (0..N_CLASSES as u8).collect(),
        bands: if samples.n_features == N_BANDS {
            BAND_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            (0..samples.n_features).map(|i| format!("F{i}")).collect()
        },
        meta,
        trees,
    })
}

/// Train on the train half of a sample set.
pub fn train_on_samples(set: &SampleSet, params: &ForestParams, seed: u64, scene_id: &str) -> Result<ForestModel> {
    let (rows, labels) = set.matrix(Split::Train);
    let x: Vec<f32> = rows.iter().flatten().copied().collect();
    let samples = Samples::new(&x, &labels, N_BANDS)?;
    let meta = TrainingMeta {
        scene_id: scene_id.to_string(),
        seed,
        class_counts: set.class_counts(Split::Train),
    };
    train_forest(&samples, params, seed, meta)
}
