use std::path::Path;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use super::model::{argmax, ForestModel};
use crate::error::{Error, Result};
use crate::label::LabelRaster;
use crate::raster::{read_rbin, write_rbin, GridSpec, RasterData, RasterGrid};
use crate::scene::{Scene, BAND_NAMES};
use crate::taxonomy::{Taxonomy, N_CLASSES, UNCLASSIFIED};

/// Rows handed to one worker at a time.
const ROW_BLOCK: usize = 16;

/// Dense per-scene prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePrediction {
    pub scene_id: String,
    pub datetime: DateTime<Utc>,
    pub classes: LabelRaster,
    /// One plane per class, each `spec.len()` long.
    pub probabilities: Vec<Vec<f32>>,
    pub usable: Vec<bool>,
}

impl ScenePrediction {
    pub fn spec(&self) -> &GridSpec {
        self.classes.spec()
    }

    /// Probability vector at flat index `i`.
    pub fn proba_at(&self, i: usize) -> [f32; N_CLASSES] {
        let mut p = [0f32; N_CLASSES];
        for k in 0..N_CLASSES {
            p[k] = self.probabilities[k][i];
        }
        p
    }

    /// Write `classes.rbin`, `prob_0.rbin` .. `prob_7.rbin` and
    /// `usable.rbin` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_rbin(&self.classes.to_grid(), dir.join("classes.rbin"))?;
        for (k, plane) in self.probabilities.iter().enumerate() {
            let g = RasterGrid::new(*self.spec(), RasterData::F32(plane.clone()), None)?;
            write_rbin(&g, dir.join(format!("prob_{k}.rbin")))?;
        }
        let usable = RasterGrid::new(
            *self.spec(),
            RasterData::U8(self.usable.iter().map(|&u| u as u8).collect()),
            None,
        )?;
        write_rbin(&usable, dir.join("usable.rbin"))?;
        Ok(())
    }

    /// Inverse of [`ScenePrediction::write`].
    pub fn read(dir: &Path, scene_id: &str, datetime: DateTime<Utc>) -> Result<Self> {
        let classes = LabelRaster::from_grid(&read_rbin(dir.join("classes.rbin"))?)?;
        let spec = *classes.spec();
        let mut probabilities = Vec::with_capacity(N_CLASSES);
        for k in 0..N_CLASSES {
            let g = read_rbin(dir.join(format!("prob_{k}.rbin")))?;
            if g.spec() != &spec {
                return Err(Error::Alignment(format!("prob_{k}.rbin is off the class grid")));
            }
            probabilities.push(g.to_f32_vec());
        }
        let u = read_rbin(dir.join("usable.rbin"))?;
        if u.spec() != &spec {
            return Err(Error::Alignment("usable.rbin is off the class grid".into()));
        }
        let usable = (0..u.len()).map(|i| u.value(i) != 0.0).collect();
        Ok(ScenePrediction {
            scene_id: scene_id.to_string(),
            datetime,
            classes,
            probabilities,
            usable,
        })
    }
}

/// Predict every usable pixel of `scene`.
///
/// A pixel is usable when its SCL code is in the taxonomy's usable set and
/// no band is nodata. Usable pixels receive the forest's class
/// probabilities (stored as f32) and their argmax, lowest code on ties;
/// all others get class 255 and zero probabilities.
pub fn predict_raster(model: &ForestModel, scene: &Scene, taxonomy: &Taxonomy) -> Result<ScenePrediction> {
    if model.bands.len() != BAND_NAMES.len()
        || model.bands.iter().zip(BAND_NAMES).any(|(a, b)| a != b)
    {
        return Err(Error::Alignment(format!(
            "model band order {:?} does not match the scene stack",
            model.bands
        )));
    }
    let spec = *scene.spec();
    let n = spec.len();
    let mut classes = vec![UNCLASSIFIED; n];
    let mut probs = vec![[0f32; N_CLASSES]; n];
    let mut usable = vec![false; n];

    let chunk = ROW_BLOCK * spec.width;
    classes
        .par_chunks_mut(chunk)
        .zip(probs.par_chunks_mut(chunk))
        .zip(usable.par_chunks_mut(chunk))
        .enumerate()
        .for_each(|(block, ((cls, prb), usb))| {
            let base = block * chunk;
            for j in 0..cls.len() {
                let i = base + j;
                let Some(features) = scene.features(i) else {
                    continue;
                };
                if !taxonomy.usable_raw(scene.scl(i)) {
                    continue;
                }
                let p = model.predict_proba(features);
                let mut p32 = [0f32; N_CLASSES];
                for k in 0..N_CLASSES {
                    p32[k] = p[k] as f32;
                }
                usb[j] = true;
                prb[j] = p32;
                cls[j] = argmax(&p32) as u8;
            }
        });

    let probabilities = (0..N_CLASSES)
        .map(|k| probs.iter().map(|p| p[k]).collect())
        .collect();
    Ok(ScenePrediction {
        scene_id: scene.scene_id.clone(),
        datetime: scene.datetime,
        classes: LabelRaster::new(spec, classes)?,
        probabilities,
        usable,
    })
}
