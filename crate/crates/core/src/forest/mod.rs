//! Random forest classifier: exact Gini split search, bootstrapped trees,
//! probability averaging and dense raster prediction.

mod io;
mod model;
mod params;
mod predict;
mod split;
mod tree;

pub use io::{decode_model, encode_model, read_model, write_model, RFM_MAGIC};
pub use model::{argmax, train_forest, train_on_samples, ForestModel, TrainingMeta};
pub use params::ForestParams;
pub use predict::{predict_raster, ScenePrediction};
pub use split::{best_split, gini, midpoint, ClassCounts, Samples, SplitChoice, MIN_DECREASE};
pub use tree::{grow_tree, Node, Tree};
