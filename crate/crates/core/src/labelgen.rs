//! Ground-truth harmonization and per-scene sample selection.
//!
//! Legacy 30 m labels are mapped to leaf classes, regridded onto the 10 m
//! scene grid and kept only where the scene's own classification agrees.
//! One pixel per 30 m label cell becomes a sample candidate, and candidates
//! are split per class into equal train and test halves.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::LabelRaster;
use crate::raster::{resample_nearest, GridSpec, RasterData, RasterGrid};
use crate::rng::{Rng64, StreamTag};
use crate::scene::{Scene, BAND_NAMES, N_BANDS};
use crate::taxonomy::{Taxonomy, N_CLASSES, TRAINING_SCL, UNCLASSIFIED};

/// Label cell edge in 10 m pixels.
pub const BLOCK: usize = 3;

/// Cloud confidence at or above this disqualifies a training pixel.
pub const MAX_TRAINING_CLOUD_CONF: f64 = 50.0;

/// Mean cloud confidence over non-nodata pixels, as a fraction.
pub fn scene_cloud_fraction(cloud_conf: &RasterGrid) -> Result<f64> {
    let (sum, n) = (0..cloud_conf.len())
        .filter_map(|i| cloud_conf.valid_value(i))
        .fold((0.0f64, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(Error::Argument("cloud confidence raster is entirely nodata".into()));
    }
    Ok(sum / n as f64 / 100.0)
}

/// Map a raw legacy-code raster to leaf classes (nodata stays unclassified)
/// and regrid it by nearest neighbour onto `target`.
pub fn harmonize_gl30(gl30: &RasterGrid, taxonomy: &Taxonomy, target: &GridSpec) -> Result<LabelRaster> {
    let codes = (0..gl30.len())
        .map(|i| match gl30.valid_value(i) {
            None => Ok(UNCLASSIFIED),
            Some(v) if v.fract() == 0.0 && (0.0..=255.0).contains(&v) => {
                taxonomy.map_gl30_raw(v as u8).map(|c| c.code())
            }
            Some(v) => Err(Error::Mapping(format!("unknown GlobeLand30 value {v}"))),
        })
        .collect::<Result<Vec<u8>>>()?;
    let mapped = LabelRaster::new(*gl30.spec(), codes)?;
    LabelRaster::from_grid(&resample_nearest(&mapped.to_grid(), target)?)
}

/// Keep a label only where its class agrees with the scene classification.
pub fn filter_labels(labels: &LabelRaster, scl: &RasterGrid, taxonomy: &Taxonomy) -> Result<LabelRaster> {
    if labels.spec() != scl.spec() {
        return Err(Error::Alignment(
            "label raster and scene classification are on different grids".into(),
        ));
    }
    let codes = (0..labels.spec().len())
        .map(|i| {
            let class = labels.get(i);
            let keep = class != UNCLASSIFIED
                && scl
                    .valid_value(i)
                    .is_some_and(|s| s.fract() == 0.0 && (0.0..12.0).contains(&s) && taxonomy.agrees(class, s as u8));
            if keep {
                class
            } else {
                UNCLASSIFIED
            }
        })
        .collect();
    LabelRaster::new(*labels.spec(), codes)
}

/// Pixels eligible as training samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityMask {
    spec: GridSpec,
    mask: Vec<bool>,
}

impl ValidityMask {
    pub fn new(spec: GridSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != spec.len() {
            return Err(Error::Argument("mask length does not match grid".into()));
        }
        Ok(ValidityMask { spec, mask })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&v| v).count()
    }

    pub fn to_grid(&self) -> RasterGrid {
        RasterGrid::new(
            self.spec,
            RasterData::U8(self.mask.iter().map(|&b| b as u8).collect()),
            None,
        )
        .expect("mask is a valid u8 grid")
    }
}

/// Valid training pixel: every band present and strictly positive, SCL in
/// the clean set and cloud confidence below the training threshold.
pub fn build_validity_mask(scene: &Scene) -> ValidityMask {
    let mask = (0..scene.spec().len())
        .map(|i| {
            scene
                .features(i)
                .is_some_and(|f| f.iter().all(|&v| v > 0.0))
                && TRAINING_SCL.contains(&scene.scl(i))
                && scene
                    .cloud_conf(i)
                    .is_some_and(|c| c < MAX_TRAINING_CLOUD_CONF)
        })
        .collect();
    ValidityMask {
        spec: *scene.spec(),
        mask,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub row: usize,
    pub col: usize,
    pub class: u8,
}

/// Most frequent code among `codes`; ties go to the lowest code.
fn modal(codes: impl Iterator<Item = u8>) -> u8 {
    let mut counts = [0u16; 256];
    for c in codes {
        counts[c as usize] += 1;
    }
    let mut best = 0usize;
    for c in 1..256 {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best as u8
}

/// One candidate per 3x3 label block.
///
/// The block's label is the mode of its nine filtered codes. Among block
/// pixels that are valid and carry that label, one is drawn uniformly from
/// the stream `(seed, BLOCK_PICK, block index)`. Edge blocks of grids not
/// divisible by three are partial. Output is ordered by block row, then
/// block column.
pub fn pick_block_candidates(labels: &LabelRaster, valid: &ValidityMask, seed: u64) -> Result<Vec<Candidate>> {
    let spec = *labels.spec();
    if valid.spec() != &spec {
        return Err(Error::Alignment("labels and validity mask differ in grid".into()));
    }
    let block_rows = spec.height.div_ceil(BLOCK);
    let block_cols = spec.width.div_ceil(BLOCK);

    let per_row: Vec<Vec<Candidate>> = (0..block_rows)
        .into_par_iter()
        .map(|br| {
            let rows = br * BLOCK..((br + 1) * BLOCK).min(spec.height);
            let mut out = Vec::new();
            let mut eligible = Vec::with_capacity(BLOCK * BLOCK);
            for bc in 0..block_cols {
                let cols = bc * BLOCK..((bc + 1) * BLOCK).min(spec.width);
                let pixels = rows
                    .clone()
                    .flat_map(|r| cols.clone().map(move |c| (r, c)));
                let label = modal(pixels.clone().map(|(r, c)| labels.at(r, c)));
                if label == UNCLASSIFIED {
                    continue;
                }
                eligible.clear();
                eligible.extend(
                    pixels.filter(|&(r, c)| labels.at(r, c) == label && valid.get(spec.index(r, c))),
                );
                if eligible.is_empty() {
                    continue;
                }
                let block_index = (br * block_cols + bc) as u64;
                let mut rng = Rng64::stream(seed, StreamTag::BlockPick, block_index);
                let (row, col) = eligible[rng.below_usize(eligible.len())];
                out.push(Candidate { row, col, class: label });
            }
            out
        })
        .collect();
    Ok(per_row.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub row: usize,
    pub col: usize,
    pub class: u8,
    pub split: Split,
    pub features: [f32; N_BANDS],
}

/// Stratified train/test samples for one scene, grouped by class.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn split(&self, which: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == which)
    }

    /// Per-class counts for one half.
    pub fn class_counts(&self, which: Split) -> [u64; N_CLASSES] {
        let mut counts = [0u64; N_CLASSES];
        for s in self.split(which) {
            counts[s.class as usize] += 1;
        }
        counts
    }

    /// Feature matrix and labels for one half.
    pub fn matrix(&self, which: Split) -> (Vec<[f32; N_BANDS]>, Vec<u8>) {
        self.split(which).map(|s| (s.features, s.class)).unzip()
    }

    /// Audit CSV: `row,col,class,split,B02..B12`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,class,split");
        for b in BAND_NAMES {
            out.push(',');
            out.push_str(b);
        }
        out.push('\n');
        for s in &self.samples {
            let split = match s.split {
                Split::Train => "train",
                Split::Test => "test",
            };
            let _ = write!(out, "{},{},{},{}", s.row, s.col, s.class, split);
            for v in s.features {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Split candidates per class: shuffle each class with the stream
/// `(seed, SPLIT, class)` and deal alternately into train and test, train
/// first. Features are read from `scene` at the candidate positions.
pub fn stratified_split(candidates: &[Candidate], scene: &Scene, seed: u64) -> Result<SampleSet> {
    if candidates.is_empty() {
        return Err(Error::Argument("no sample candidates".into()));
    }
    let spec = scene.spec();
    let mut samples = Vec::with_capacity(candidates.len());
    for class in 0..N_CLASSES as u8 {
        let mut members: Vec<&Candidate> = candidates.iter().filter(|c| c.class == class).collect();
        if members.is_empty() {
            continue;
        }
        Rng64::stream(seed, StreamTag::Split, class as u64).shuffle(&mut members);
        for (k, cand) in members.into_iter().enumerate() {
            if cand.row >= spec.height || cand.col >= spec.width {
                return Err(Error::Alignment(format!(
                    "candidate ({}, {}) lies outside the scene",
                    cand.row, cand.col
                )));
            }
            let features: [f32; N_BANDS] = scene
                .features(spec.index(cand.row, cand.col))
                .ok_or_else(|| {
                    Error::Argument(format!(
                        "candidate ({}, {}) has nodata features",
                        cand.row, cand.col
                    ))
                })?
                .try_into()
                .expect("feature vectors hold N_BANDS values");
            samples.push(Sample {
                row: cand.row,
                col: cand.col,
                class,
                split: if k % 2 == 0 { Split::Train } else { Split::Test },
                features,
            });
        }
    }
    Ok(SampleSet { samples })
}
