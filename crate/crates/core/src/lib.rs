//! Land-cover label synthesis for multispectral scenes.
//!
//! Coarse legacy land-cover labels are harmonized onto a fine scene grid,
//! filtered by agreement with the scene's own classification layer, sampled
//! one pixel per label cell and split per class. A random forest trained on
//! the train half is scored on the test half and then predicts a class and
//! a probability vector for every usable pixel; per-scene predictions are
//! summed into annual labels.

pub mod error;
pub mod label;
pub mod labelgen;
pub mod forest;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod synth;
pub mod taxonomy;

pub use error::{Error, Result};
pub use forest::{ForestModel, ForestParams, ScenePrediction};
pub use label::LabelRaster;
pub use labelgen::{Candidate, SampleSet, Split, ValidityMask};
pub use pipeline::{AnnualLabel, Metrics, SceneConfig, SceneResult};
pub use raster::{DType, GridSpec, RasterGrid};
pub use rng::Rng64;
pub use scene::{Scene, SceneManifest, BAND_NAMES, N_BANDS};
pub use synth::SynthSpec;
pub use taxonomy::{LcClass, Taxonomy, N_CLASSES, UNCLASSIFIED};
