use std::cmp::Ordering;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{argmax, ScenePrediction};
use crate::label::LabelRaster;
use crate::raster::{write_rbin, GridSpec, RasterData, RasterGrid};
use crate::taxonomy::{N_CLASSES, UNCLASSIFIED};

/// Per-pixel aggregate of a time series of scene predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualLabel {
    pub classes: LabelRaster,
    /// Summed class probabilities, one plane per class.
    pub summed: Vec<Vec<f32>>,
    /// Number of scenes in which each pixel was usable.
    pub observations: Vec<u16>,
    /// `max(summed) / observations`, zero where unobserved.
    pub confidence: Vec<f32>,
    /// Scene identifiers in summation order.
    pub scene_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualReport {
    pub scenes: Vec<String>,
    pub observed_pixels: u64,
    pub unobserved_pixels: u64,
    pub class_pixels: [u64; N_CLASSES],
    pub mean_confidence: f64,
    pub max_observations: u16,
}

fn bitwise_cmp(a: &[f32], b: &[f32]) -> Ordering {
    a.iter()
        .map(|v| v.to_bits())
        .cmp(b.iter().map(|v| v.to_bits()))
}

/// Canonical summation order: by acquisition time, then scene id, then
/// content, so any permutation of the inputs sums identically.
fn canonical_order(a: &ScenePrediction, b: &ScenePrediction) -> Ordering {
    a.datetime
        .cmp(&b.datetime)
        .then_with(|| a.scene_id.cmp(&b.scene_id))
        .then_with(|| a.classes.codes().cmp(b.classes.codes()))
        .then_with(|| {
            a.probabilities
                .iter()
                .zip(&b.probabilities)
                .map(|(x, y)| bitwise_cmp(x, y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Sum each pixel's probability vectors over the scenes in which it is
/// usable. The class is the argmax of the sums (lowest code on ties), or
/// 255 where no scene observed the pixel. An empty list yields an entirely
/// unobserved grid.
pub fn aggregate(spec: &GridSpec, predictions: &[ScenePrediction]) -> Result<AnnualLabel> {
    for p in predictions {
        if p.spec() != spec {
            return Err(Error::Alignment(format!(
                "prediction {} is not on the aggregation grid",
                p.scene_id
            )));
        }
    }
    let mut ordered: Vec<&ScenePrediction> = predictions.iter().collect();
    ordered.sort_by(|a, b| canonical_order(a, b));

    let n = spec.len();
    let mut sums = vec![[0f64; N_CLASSES]; n];
    let mut observations = vec![0u16; n];
    for p in &ordered {
        for i in 0..n {
            if !p.usable[i] {
                continue;
            }
            observations[i] = observations[i].saturating_add(1);
            for k in 0..N_CLASSES {
                sums[i][k] += p.probabilities[k][i] as f64;
            }
        }
    }

    let mut summed = vec![vec![0f32; n]; N_CLASSES];
    let mut classes = vec![UNCLASSIFIED; n];
    let mut confidence = vec![0f32; n];
    for i in 0..n {
        let mut s32 = [0f32; N_CLASSES];
        for k in 0..N_CLASSES {
            s32[k] = sums[i][k] as f32;
            summed[k][i] = s32[k];
        }
        if observations[i] > 0 {
            let best = argmax(&s32);
            classes[i] = best as u8;
            confidence[i] = s32[best] / observations[i] as f32;
        }
    }
    Ok(AnnualLabel {
        classes: LabelRaster::new(*spec, classes)?,
        summed,
        observations,
        confidence,
        scene_ids: ordered.iter().map(|p| p.scene_id.clone()).collect(),
    })
}

impl AnnualLabel {
    pub fn spec(&self) -> &GridSpec {
        self.classes.spec()
    }

    /// View as a single prediction: observed pixels are usable and carry
    /// their mean probability vector.
    pub fn as_prediction(&self, scene_id: &str, datetime: chrono::DateTime<chrono::Utc>) -> ScenePrediction {
        let n = self.spec().len();
        let probabilities = self
            .summed
            .iter()
            .map(|plane| {
                (0..n)
                    .map(|i| match self.observations[i] {
                        0 => 0.0,
                        c => plane[i] / c as f32,
                    })
                    .collect()
            })
            .collect();
        ScenePrediction {
            scene_id: scene_id.to_string(),
            datetime,
            classes: self.classes.clone(),
            probabilities,
            usable: self.observations.iter().map(|&c| c > 0).collect(),
        }
    }

    pub fn report(&self) -> AnnualReport {
        let observed = self.observations.iter().filter(|&&c| c > 0).count() as u64;
        let conf_sum: f64 = self
            .confidence
            .iter()
            .zip(&self.observations)
            .filter(|(_, &c)| c > 0)
            .map(|(&v, _)| v as f64)
            .sum();
        AnnualReport {
            scenes: self.scene_ids.clone(),
            observed_pixels: observed,
            unobserved_pixels: self.observations.len() as u64 - observed,
            class_pixels: self.classes.histogram(),
            mean_confidence: if observed > 0 { conf_sum / observed as f64 } else { 0.0 },
            max_observations: self.observations.iter().copied().max().unwrap_or(0),
        }
    }

    /// Write `annual_classes.rbin`, `annual_conf.rbin`, `annual_count.rbin`
    /// and `annual_report.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let spec = *self.spec();
        write_rbin(&self.classes.to_grid(), dir.join("annual_classes.rbin"))?;
        write_rbin(
            &RasterGrid::new(spec, RasterData::F32(self.confidence.clone()), None)?,
            dir.join("annual_conf.rbin"),
        )?;
        write_rbin(
            &RasterGrid::new(spec, RasterData::U16(self.observations.clone()), None)?,
            dir.join("annual_count.rbin"),
        )?;
        let path = dir.join("annual_report.json");
        let mut text = serde_json::to_string_pretty(&self.report()).map_err(|e| Error::json(&path, e))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn spec(n: usize) -> GridSpec {
        GridSpec::new(n, 1, 0.0, 0.0, 10.0).unwrap()
    }

    fn pred(id: &str, day: u32, probs: &[[f32; N_CLASSES]], usable: &[bool]) -> ScenePrediction {
        let n = probs.len();
        let classes = probs
            .iter()
            .zip(usable)
            .map(|(p, &u)| if u { argmax(p) as u8 } else { UNCLASSIFIED })
            .collect();
        ScenePrediction {
            scene_id: id.into(),
            datetime: Utc.with_ymd_and_hms(2017, 8, day, 0, 0, 0).unwrap(),
            classes: LabelRaster::new(spec(n), classes).unwrap(),
            probabilities: (0..N_CLASSES)
                .map(|k| probs.iter().zip(usable).map(|(p, &u)| if u { p[k] } else { 0.0 }).collect())
                .collect(),
            usable: usable.to_vec(),
        }
    }

    fn p2(a: f32, b: f32) -> [f32; N_CLASSES] {
        let mut p = [0.0; N_CLASSES];
        p[0] = a;
        p[1] = b;
        p
    }

    #[test]
    fn single_scene_passes_through() {
        let s = pred("a", 1, &[p2(0.9, 0.1), p2(0.2, 0.8), p2(1.0, 0.0)], &[true, true, false]);
        let a = aggregate(&spec(3), std::slice::from_ref(&s)).unwrap();
        assert_eq!(a.classes.codes(), &[0, 1, UNCLASSIFIED]);
        assert_eq!(a.observations, vec![1, 1, 0]);
        assert_eq!(a.confidence[2], 0.0);
    }

    #[test]
    fn sums_decide() {
        let a = pred("a", 1, &[p2(0.6, 0.4)], &[true]);
        let b = pred("b", 2, &[p2(0.1, 0.9)], &[true]);
        let out = aggregate(&spec(1), &[a, b]).unwrap();
        assert!((out.summed[0][0] - 0.7).abs() < 1e-6);
        assert!((out.summed[1][0] - 1.3).abs() < 1e-6);
        assert_eq!(out.classes.get(0), 1);
        assert!((out.confidence[0] - 0.65).abs() < 1e-6);
    }

    #[test]
    fn order_does_not_matter() {
        let a = pred("a", 1, &[p2(0.3, 0.7), p2(0.55, 0.45)], &[true, true]);
        let b = pred("b", 5, &[p2(0.1, 0.9), p2(0.5, 0.5)], &[true, false]);
        let c = pred("c", 3, &[p2(0.6, 0.4), p2(0.45, 0.55)], &[false, true]);
        let x = aggregate(&spec(2), &[a.clone(), b.clone(), c.clone()]).unwrap();
        let y = aggregate(&spec(2), &[c, a, b]).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.scene_ids, vec!["a", "c", "b"]);
    }

    #[test]
    fn empty_list_is_unobserved() {
        let out = aggregate(&spec(4), &[]).unwrap();
        assert_eq!(out.classes.labeled_count(), 0);
        assert_eq!(out.report().unobserved_pixels, 4);
    }

    #[test]
    fn annual_as_prediction_is_idempotent() {
        let a = pred("a", 1, &[p2(0.3, 0.7), p2(0.55, 0.45), p2(0.5, 0.5)], &[true, true, false]);
        let b = pred("b", 2, &[p2(0.1, 0.9), p2(0.5, 0.5), p2(0.5, 0.5)], &[true, false, false]);
        let annual = aggregate(&spec(3), &[a, b]).unwrap();
        let again = aggregate(&spec(3), &[annual.as_prediction("annual", Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap())]).unwrap();
        assert_eq!(again.classes, annual.classes);
    }

    #[test]
    fn misaligned_prediction_is_rejected() {
        let a = pred("a", 1, &[p2(1.0, 0.0)], &[true]);
        assert!(matches!(aggregate(&spec(2), &[a]), Err(Error::Alignment(_))));
    }
}
