//! Commands behind the `terralabel` binary.
//!
//! Exit codes: 0 success, 1 runtime error, 2 invalid configuration,
//! 3 missing inputs.

mod config;
mod report;
mod run;

use std::fs;
use std::path::{Path, PathBuf};

use terralabel::synth::{write_tile, SynthSpec, TileSummary};

pub use config::{Overrides, RunConfig};
pub use report::{cmd_report, render_report};
pub use run::{cmd_aggregate, cmd_run, SceneEntry, SkipEntry, Summary, FailEntry};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Missing(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Missing(_) => 3,
        }
    }
}

impl From<terralabel::Error> for CliError {
    fn from(e: terralabel::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Materialize a synthetic tile described by `spec_path`. The output goes
/// to `out`, or to a directory named after the tile next to the spec file.
pub fn cmd_synth(
    spec_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<(PathBuf, TileSummary), CliError> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| CliError::Missing(format!("{}: {e}", spec_path.display())))?;
    let mut spec: SynthSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("synth spec: {e}")))?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => spec_path.parent().unwrap_or(Path::new(".")).join(&spec.tile_id),
    };
    let summary = write_tile(&spec, &dir)?;
    Ok((dir, summary))
}
