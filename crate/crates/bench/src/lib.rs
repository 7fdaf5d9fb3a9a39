//! Fixtures shared by the benchmarks.

use terralabel::synth::{gen_scene, gen_truth, SceneLayers, SynthSpec};
use terralabel::{LabelRaster, Result};

/// A small synthetic tile with one scene.
pub fn fixture(size: usize, seed: u64) -> Result<(SynthSpec, LabelRaster, SceneLayers)> {
    let spec = SynthSpec {
        width: size,
        height: size,
        n_sites: 16,
        n_scenes: 1,
        ..SynthSpec::reference(seed)
    };
    let truth = gen_truth(&spec)?;
    let scene = gen_scene(&truth, &spec, 0)?;
    Ok((spec, truth, scene))
}
