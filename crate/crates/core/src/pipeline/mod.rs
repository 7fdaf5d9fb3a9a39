//! Scene-level orchestration, evaluation and temporal aggregation.

mod aggregate;
mod metrics;
mod run;

pub use aggregate::{aggregate, AnnualLabel, AnnualReport};
pub use metrics::{average_accuracy, evaluate, ClassStats, Metrics};
pub use run::{run_scene, scene_seed, SceneConfig, SceneReport, SceneResult, DEFAULT_CLOUD_THRESHOLD};
