//! Synthetic tiles with known ground truth.
//!
//! Truth is a Voronoi partition of the tile with each cell assigned a class
//! by weight. Scenes draw every 10 m band as class mean plus Gaussian noise;
//! the 20 m bands are 2x2 block means of a hidden 10 m field. The 20 m
//! scene classification follows the block's modal class and is overwritten
//! by cloud disks. The legacy 30 m labels are 3x3 block modes with an exact
//! number of cells reassigned to a different class.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::LabelRaster;
use crate::raster::{write_rbin, GridSpec, RasterData, RasterGrid};
use crate::rng::{derive_seed, Rng64, StreamTag};
use crate::scene::{BandFile, SceneManifest, BAND_NAMES, BAND_RESOLUTIONS, N_BANDS};
use crate::taxonomy::{Gl30Code, LcClass, Taxonomy, N_CLASSES};

/// Mean reflectance per class, bands in `BAND_NAMES` order.
pub const DEFAULT_SPECTRA: [[f64; N_BANDS]; N_CLASSES] = [
    // water
    [0.070, 0.060, 0.045, 0.030, 0.040, 0.032, 0.030, 0.028, 0.020, 0.015],
    // snow/ice
    [0.900, 0.880, 0.860, 0.800, 0.850, 0.830, 0.820, 0.780, 0.120, 0.100],
    // wetland
    [0.050, 0.070, 0.060, 0.220, 0.090, 0.160, 0.190, 0.210, 0.120, 0.070],
    // (semi) natural vegetation
    [0.060, 0.090, 0.090, 0.280, 0.130, 0.200, 0.240, 0.270, 0.260, 0.180],
    // woody vegetation
    [0.030, 0.050, 0.030, 0.300, 0.070, 0.200, 0.260, 0.290, 0.140, 0.070],
    // cultivated vegetation
    [0.050, 0.090, 0.050, 0.420, 0.110, 0.300, 0.380, 0.410, 0.220, 0.120],
    // natural bare ground
    [0.140, 0.180, 0.220, 0.300, 0.250, 0.280, 0.300, 0.310, 0.380, 0.330],
    // artificial bare ground
    [0.120, 0.130, 0.140, 0.200, 0.150, 0.170, 0.190, 0.200, 0.240, 0.220],
];

/// Generated reflectances never drop below this.
pub const MIN_REFLECTANCE: f32 = 1e-4;

/// SCL code written for cloud disks.
pub const CLOUD_SCL: u8 = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(default = "default_tile_id")]
    pub tile_id: String,
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_origin_x")]
    pub origin_x: f64,
    #[serde(default = "default_origin_y")]
    pub origin_y: f64,
    pub n_sites: usize,
    pub class_weights: [f64; N_CLASSES],
    #[serde(default = "default_spectra")]
    pub class_spectra: [[f64; N_BANDS]; N_CLASSES],
    /// Absolute noise sigma in reflectance units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    /// Noise sigma as a multiple of the minimum inter-class distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma_relative: Option<f64>,
    pub cloud_fraction: f64,
    /// Per-scene cloud fraction, keyed by scene index.
    #[serde(default)]
    pub cloud_overrides: BTreeMap<usize, f64>,
    pub gl30_corruption: f64,
    pub n_scenes: usize,
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start: DateTime<Utc>,
    #[serde(default = "default_revisit")]
    pub revisit_days: u32,
}

fn default_tile_id() -> String {
    "SYNTH".into()
}
fn default_origin_x() -> f64 {
    500_000.0
}
fn default_origin_y() -> f64 {
    5_000_000.0
}
fn default_spectra() -> [[f64; N_BANDS]; N_CLASSES] {
    DEFAULT_SPECTRA
}
fn default_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2017, 7, 1, 10, 30, 0).unwrap()
}
fn default_revisit() -> u32 {
    30
}

impl SynthSpec {
    /// 384x384 tile, 8 equally weighted classes, 12 scenes, sigma at 0.2x
    /// the closest class pair, 10% cloud and 20% legacy corruption.
    pub fn reference(seed: u64) -> Self {
        SynthSpec {
            tile_id: default_tile_id(),
            width: 384,
            height: 384,
            origin_x: default_origin_x(),
            origin_y: default_origin_y(),
            n_sites: 32,
            class_weights: [1.0 / N_CLASSES as f64; N_CLASSES],
            class_spectra: DEFAULT_SPECTRA,
            noise_sigma: None,
            noise_sigma_relative: Some(0.2),
            cloud_fraction: 0.1,
            cloud_overrides: BTreeMap::new(),
            gl30_corruption: 0.2,
            n_scenes: 12,
            seed,
            start: default_start(),
            revisit_days: default_revisit(),
        }
    }

    /// Field-level validation.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Argument(format!("{field}: {msg}")));
        for (field, v) in [("width", self.width), ("height", self.height)] {
            if v < 6 || v % 6 != 0 {
                return bad(field, format!("must be a positive multiple of 6, got {v}"));
            }
        }
        if self.n_sites < 1 {
            return bad("n_sites", "must be at least 1".into());
        }
        if self.class_weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return bad("class_weights", "weights must be non-negative".into());
        }
        let total: f64 = self.class_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad("class_weights", format!("must sum to 1, got {total}"));
        }
        if self.class_spectra.iter().flatten().any(|v| !v.is_finite() || *v < MIN_REFLECTANCE as f64) {
            return bad("class_spectra", format!("means must be finite and at least {MIN_REFLECTANCE}"));
        }
        match (self.noise_sigma, self.noise_sigma_relative) {
            (Some(_), Some(_)) | (None, None) => {
                return bad("noise_sigma", "give exactly one of noise_sigma or noise_sigma_relative".into())
            }
            (Some(s), None) if s.is_nan() || s < 0.0 => return bad("noise_sigma", format!("must be >= 0, got {s}")),
            (None, Some(r)) if r.is_nan() || r < 0.0 => {
                return bad("noise_sigma_relative", format!("must be >= 0, got {r}"))
            }
            _ => {}
        }
        for (field, v) in [("cloud_fraction", self.cloud_fraction), ("gl30_corruption", self.gl30_corruption)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(field, format!("must lie in [0, 1], got {v}"));
            }
        }
        for (&scene, &v) in &self.cloud_overrides {
            if scene >= self.n_scenes {
                return bad("cloud_overrides", format!("scene {scene} is beyond n_scenes"));
            }
            if !(0.0..=1.0).contains(&v) {
                return bad("cloud_overrides", format!("scene {scene}: {v} is outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Smallest Euclidean distance between two class mean vectors.
    pub fn min_class_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..N_CLASSES {
            for b in a + 1..N_CLASSES {
                let d: f64 = (0..N_BANDS)
                    .map(|k| (self.class_spectra[a][k] - self.class_spectra[b][k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
        }
        best
    }

    pub fn sigma(&self) -> f64 {
        match (self.noise_sigma, self.noise_sigma_relative) {
            (Some(s), _) => s,
            (None, Some(r)) => r * self.min_class_distance(),
            (None, None) => 0.0,
        }
    }

    pub fn grid_10m(&self) -> GridSpec {
        GridSpec {
            width: self.width,
            height: self.height,
            origin_x: self.origin_x,
            origin_y: self.origin_y,
            pixel_size: 10.0,
        }
    }

    pub fn scene_cloud_target(&self, index: usize) -> f64 {
        self.cloud_overrides.get(&index).copied().unwrap_or(self.cloud_fraction)
    }

    pub fn scene_id(&self, index: usize) -> String {
        format!("{}_S{index:02}", self.tile_id)
    }

    pub fn scene_datetime(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::days(self.revisit_days as i64 * index as i64)
    }
}

/// Voronoi site in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub x: f64,
    pub y: f64,
    pub class: u8,
}

fn pick_weighted(weights: &[f64; N_CLASSES], u: f64) -> u8 {
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k as u8;
        }
    }
    // Rounding can leave `u` just above the running sum; fall back to the
    // last class with positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0) as u8
}

/// Sites drawn from the stream `(seed, SITES, 0)`: x, y, class draw per
/// site, in order.
pub fn gen_sites(spec: &SynthSpec) -> Result<Vec<Site>> {
    if spec.n_sites < 1 {
        return Err(Error::Argument("n_sites: must be at least 1".into()));
    }
    let mut rng = Rng64::stream(spec.seed, StreamTag::Sites, 0);
    Ok((0..spec.n_sites)
        .map(|_| {
            let x = rng.unit_f64() * spec.width as f64;
            let y = rng.unit_f64() * spec.height as f64;
            let class = pick_weighted(&spec.class_weights, rng.unit_f64());
            Site { x, y, class }
        })
        .collect())
}

/// Truth raster: every pixel takes the class of the site nearest to its
/// center (ties to the lower site index).
pub fn gen_truth(spec: &SynthSpec) -> Result<LabelRaster> {
    let sites = gen_sites(spec)?;
    let codes: Vec<u8> = (0..spec.height)
        .into_par_iter()
        .flat_map_iter(|r| {
            let sites = &sites;
            (0..spec.width).map(move |c| {
                let (px, py) = (c as f64 + 0.5, r as f64 + 0.5);
                let mut best = (f64::INFINITY, 0u8);
                for s in sites {
                    let d = (s.x - px).powi(2) + (s.y - py).powi(2);
                    if d < best.0 {
                        best = (d, s.class);
                    }
                }
                best.1
            })
        })
        .collect();
    LabelRaster::new(spec.grid_10m(), codes)
}

fn modal_class(codes: impl Iterator<Item = u8>) -> u8 {
    let mut counts = [0u32; N_CLASSES];
    for c in codes {
        counts[c as usize] += 1;
    }
    let mut best = 0;
    for k in 1..N_CLASSES {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    best as u8
}

/// Modal truth class of each `factor`x`factor` block.
fn block_modes(truth: &LabelRaster, factor: usize) -> Vec<u8> {
    let spec = truth.spec();
    let (bw, bh) = (spec.width / factor, spec.height / factor);
    let mut out = Vec::with_capacity(bw * bh);
    for br in 0..bh {
        for bc in 0..bw {
            out.push(modal_class((0..factor * factor).map(|k| {
                truth.at(br * factor + k / factor, bc * factor + k % factor)
            })));
        }
    }
    out
}

/// Canonical SCL code a clear pixel of `class` would receive.
pub fn canonical_scl(class: u8) -> u8 {
    match LcClass::from_code(class) {
        Ok(LcClass::Water) | Ok(LcClass::Wetland) => 6,
        Ok(LcClass::SnowIce) => 11,
        Ok(LcClass::NaturalBareGround) | Ok(LcClass::ArtificialBareGround) => 5,
        _ => 4,
    }
}

/// All rasters of one synthetic scene, at native resolutions.
#[derive(Debug, Clone)]
pub struct SceneLayers {
    pub scene_id: String,
    pub datetime: DateTime<Utc>,
    /// In `BAND_NAMES` order; the first four at 10 m, the rest at 20 m.
    pub bands: Vec<RasterGrid>,
    pub scl: RasterGrid,
    pub cloud_conf: RasterGrid,
}

fn noisy(mean: f64, sigma: f64, rng: &mut Rng64) -> f32 {
    let v = if sigma > 0.0 { mean + sigma * rng.gaussian() } else { mean };
    (v as f32).max(MIN_REFLECTANCE)
}

/// Paint cloud disks on a `w`x`h` mask until at least `target` of it is
/// covered.
fn cloud_mask(w: usize, h: usize, target: f64, rng: &mut Rng64) -> Vec<bool> {
    let n = w * h;
    let mut mask = vec![false; n];
    if target <= 0.0 {
        return mask;
    }
    if target >= 1.0 {
        mask.fill(true);
        return mask;
    }
    let need = (target * n as f64).ceil() as usize;
    let r_max = (w.min(h) as f64 / 12.0).max(2.0);
    let mut covered = 0;
    while covered < need {
        let cx = rng.unit_f64() * w as f64;
        let cy = rng.unit_f64() * h as f64;
        let radius = 1.0 + rng.unit_f64() * (r_max - 1.0);
        let r0 = (cy - radius).floor().max(0.0) as usize;
        let r1 = ((cy + radius).ceil() as usize).min(h);
        let c0 = (cx - radius).floor().max(0.0) as usize;
        let c1 = ((cx + radius).ceil() as usize).min(w);
        for r in r0..r1 {
            for c in c0..c1 {
                let (dx, dy) = (c as f64 + 0.5 - cx, r as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= radius * radius && !mask[r * w + c] {
                    mask[r * w + c] = true;
                    covered += 1;
                }
            }
        }
    }
    mask
}

/// Generate scene `index` over `truth`.
pub fn gen_scene(truth: &LabelRaster, spec: &SynthSpec, index: usize) -> Result<SceneLayers> {
    let g10 = *truth.spec();
    if !g10.width.is_multiple_of(2) || !g10.height.is_multiple_of(2) {
        return Err(Error::Argument("truth dimensions must be even".into()));
    }
    let g20 = g10.with_pixel_size(g10.pixel_size * 2.0);
    let sigma = spec.sigma();
    let scene_seed = derive_seed(spec.seed, StreamTag::Scene, index as u64);

    let bands: Vec<RasterGrid> = (0..N_BANDS)
        .into_par_iter()
        .map(|b| {
            let mut rng = Rng64::stream(scene_seed, StreamTag::Band, b as u64);
            let field: Vec<f32> = truth
                .codes()
                .iter()
                .map(|&c| noisy(spec.class_spectra[c as usize][b], sigma, &mut rng))
                .collect();
            if BAND_RESOLUTIONS[b] == 10 {
                return RasterGrid::from_f32(g10, field, None);
            }
            let mut coarse = Vec::with_capacity(g20.len());
            for r in 0..g20.height {
                for c in 0..g20.width {
                    let i = (2 * r) * g10.width + 2 * c;
                    let s = field[i] as f64
                        + field[i + 1] as f64
                        + field[i + g10.width] as f64
                        + field[i + g10.width + 1] as f64;
                    coarse.push((s / 4.0) as f32);
                }
            }
            RasterGrid::from_f32(g20, coarse, None)
        })
        .collect::<Result<_>>()?;

    let mut rng = Rng64::stream(scene_seed, StreamTag::Cloud, 0);
    let clouds = cloud_mask(g20.width, g20.height, spec.scene_cloud_target(index), &mut rng);
    let modes = block_modes(truth, 2);
    let scl: Vec<u8> = modes
        .iter()
        .zip(&clouds)
        .map(|(&m, &cloudy)| if cloudy { CLOUD_SCL } else { canonical_scl(m) })
        .collect();
    let conf: Vec<u8> = clouds.iter().map(|&c| if c { 100 } else { 0 }).collect();

    Ok(SceneLayers {
        scene_id: spec.scene_id(index),
        datetime: spec.scene_datetime(index),
        bands,
        scl: RasterGrid::from_u8(g20, scl, None)?,
        cloud_conf: RasterGrid::from_u8(g20, conf, None)?,
    })
}

impl SceneLayers {
    /// Write band, SCL and cloud rasters plus `manifest.json` into `dir`;
    /// manifest paths are relative to `dir`.
    pub fn write(&self, tile_id: &str, dir: &Path) -> Result<SceneManifest> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut band_paths = BTreeMap::new();
        for (b, grid) in self.bands.iter().enumerate() {
            let name = format!("{}.rbin", BAND_NAMES[b]);
            write_rbin(grid, dir.join(&name))?;
            band_paths.insert(
                BAND_NAMES[b].to_string(),
                BandFile {
                    path: PathBuf::from(name),
                    resolution: BAND_RESOLUTIONS[b],
                },
            );
        }
        write_rbin(&self.scl, dir.join("SCL.rbin"))?;
        write_rbin(&self.cloud_conf, dir.join("CLD.rbin"))?;
        let manifest = SceneManifest {
            scene_id: self.scene_id.clone(),
            tile_id: tile_id.to_string(),
            datetime: self.datetime,
            band_paths,
            scl_path: "SCL.rbin".into(),
            cloud_conf_path: "CLD.rbin".into(),
        };
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

/// Legacy 30 m classes: 3x3 block modes, then exactly
/// `round(corruption * cells)` cells (stream `(seed, CORRUPT, 0)`, without
/// replacement) moved to a uniformly drawn different class.
pub fn gen_gl30_classes(truth: &LabelRaster, spec: &SynthSpec) -> Result<LabelRaster> {
    let g10 = truth.spec();
    if !g10.width.is_multiple_of(3) || !g10.height.is_multiple_of(3) {
        return Err(Error::Argument(format!(
            "truth dimensions {}x{} are not divisible by 3",
            g10.width, g10.height
        )));
    }
    let g30 = g10.with_pixel_size(g10.pixel_size * 3.0);
    let mut cells = block_modes(truth, 3);
    let n = cells.len();
    let k = (spec.gl30_corruption * n as f64).round() as usize;

    let mut rng = Rng64::stream(spec.seed, StreamTag::Corrupt, 0);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below_usize(n - i);
        order.swap(i, j);
    }
    for &cell in &order[..k] {
        let old = cells[cell];
        let draw = rng.below(N_CLASSES as u64 - 1) as u8;
        cells[cell] = if draw < old { draw } else { draw + 1 };
    }
    LabelRaster::new(g30, cells)
}

/// Lowest legacy code mapping to each class under `taxonomy`.
pub fn canonical_gl30_codes(taxonomy: &Taxonomy) -> Result<[u8; N_CLASSES]> {
    let mut out = [0u8; N_CLASSES];
    for (k, class) in LcClass::TRAINABLE.iter().enumerate() {
        out[k] = Gl30Code::ALL
            .iter()
            .copied()
            .find(|&c| taxonomy.map_gl30_raw(c).ok() == Some(*class))
            .ok_or_else(|| Error::Mapping(format!("no legacy code maps to {class}")))?;
    }
    Ok(out)
}

/// Legacy 30 m raster in GlobeLand30 codes.
pub fn gen_gl30(truth: &LabelRaster, spec: &SynthSpec, taxonomy: &Taxonomy) -> Result<RasterGrid> {
    let classes = gen_gl30_classes(truth, spec)?;
    let codes = canonical_gl30_codes(taxonomy)?;
    RasterGrid::new(
        *classes.spec(),
        RasterData::U8(classes.codes().iter().map(|&c| codes[c as usize]).collect()),
        None,
    )
}

/// What `write_tile` produced.
#[derive(Debug, Clone)]
pub struct TileSummary {
    pub scenes: Vec<(SceneManifest, f64)>,
}

/// Materialize a full tile: `truth.rbin`, `gl30.rbin`, `synthspec.json` and
/// one `scene_NN/` directory per scene.
pub fn write_tile(spec: &SynthSpec, dir: &Path) -> Result<TileSummary> {
    spec.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let truth = gen_truth(spec)?;
    write_rbin(&truth.to_grid(), dir.join("truth.rbin"))?;
    write_rbin(&gen_gl30(&truth, spec, &Taxonomy::default())?, dir.join("gl30.rbin"))?;

    let path = dir.join("synthspec.json");
    let mut text = serde_json::to_string_pretty(spec).map_err(|e| Error::json(&path, e))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;

    let mut scenes = Vec::with_capacity(spec.n_scenes);
    for index in 0..spec.n_scenes {
        let layers = gen_scene(&truth, spec, index)?;
        let cloud = crate::labelgen::scene_cloud_fraction(&layers.cloud_conf)?;
        let manifest = layers.write(&spec.tile_id, &dir.join(format!("scene_{index:02}")))?;
        scenes.push((manifest, cloud));
    }
    Ok(TileSummary { scenes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthSpec {
        SynthSpec {
            width: 48,
            height: 36,
            n_sites: 6,
            n_scenes: 2,
            ..SynthSpec::reference(seed)
        }
    }

    #[test]
    fn reference_is_valid() {
        let s = SynthSpec::reference(42);
        s.validate().unwrap();
        assert!((s.sigma() - 0.2 * s.min_class_distance()).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_field() {
        let mut s = small(1);
        s.class_weights[0] += 0.1;
        let e = s.validate().unwrap_err().to_string();
        assert!(e.contains("class_weights"), "{e}");
        let mut s = small(1);
        s.width = 50;
        assert!(s.validate().unwrap_err().to_string().contains("width"));
        let mut s = small(1);
        s.noise_sigma = Some(0.1);
        assert!(s.validate().is_err());
        let mut s = small(1);
        s.cloud_overrides.insert(5, 0.5);
        assert!(s.validate().is_err());
    }

    #[test]
    fn one_site_is_uniform() {
        let s = SynthSpec { n_sites: 1, ..small(3) };
        let t = gen_truth(&s).unwrap();
        let first = t.get(0);
        assert!(t.codes().iter().all(|&c| c == first));
        assert!(gen_truth(&SynthSpec { n_sites: 0, ..small(3) }).is_err());
    }

    #[test]
    fn truth_is_deterministic() {
        assert_eq!(gen_truth(&small(8)).unwrap(), gen_truth(&small(8)).unwrap());
        assert_ne!(gen_truth(&small(8)).unwrap(), gen_truth(&small(9)).unwrap());
    }

    #[test]
    fn truth_histogram_matches_exhaustive_scan() {
        let s = SynthSpec {
            width: 66,
            height: 66,
            n_sites: 17,
            ..small(12)
        };
        // 64x64 interior is what matters; 66 keeps the multiple-of-6 rule.
        let sites = gen_sites(&s).unwrap();
        let t = gen_truth(&s).unwrap();
        let mut oracle = [0u64; N_CLASSES];
        for r in 0..s.height {
            for c in 0..s.width {
                let (px, py) = (c as f64 + 0.5, r as f64 + 0.5);
                let nearest = (0..sites.len())
                    .min_by(|&a, &b| {
                        let da = (sites[a].x - px).hypot(sites[a].y - py);
                        let db = (sites[b].x - px).hypot(sites[b].y - py);
                        da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                    })
                    .unwrap();
                oracle[sites[nearest].class as usize] += 1;
            }
        }
        assert_eq!(t.histogram(), oracle);
    }

    #[test]
    fn noiseless_clear_scene_equals_class_means() {
        let s = SynthSpec {
            noise_sigma: Some(0.0),
            noise_sigma_relative: None,
            cloud_fraction: 0.0,
            ..small(5)
        };
        let t = gen_truth(&s).unwrap();
        let layers = gen_scene(&t, &s, 0).unwrap();
        for b in 0..4 {
            for i in 0..t.codes().len() {
                let want = s.class_spectra[t.get(i) as usize][b] as f32;
                assert_eq!(layers.bands[b].value(i), want as f64);
            }
        }
        assert!(layers.cloud_conf.min_max().unwrap().1 == 0.0);
    }

    #[test]
    fn full_cloud_scene() {
        let s = SynthSpec {
            cloud_fraction: 1.0,
            ..small(5)
        };
        let t = gen_truth(&s).unwrap();
        let layers = gen_scene(&t, &s, 1).unwrap();
        assert!((0..layers.scl.len()).all(|i| layers.scl.value(i) == 9.0));
        assert_eq!(crate::labelgen::scene_cloud_fraction(&layers.cloud_conf).unwrap(), 1.0);
    }

    #[test]
    fn cloud_target_is_met_closely() {
        let mut rng = Rng64::new(4);
        for target in [0.1, 0.5, 0.85, 0.95] {
            let m = cloud_mask(192, 192, target, &mut rng);
            let f = m.iter().filter(|&&b| b).count() as f64 / m.len() as f64;
            assert!(f >= target && f < target + 0.03, "{target} -> {f}");
        }
    }

    #[test]
    fn scl_agrees_with_truth_on_clear_blocks() {
        let s = SynthSpec {
            n_scenes: 1,
            ..SynthSpec::reference(21)
        };
        let t = gen_truth(&s).unwrap();
        let layers = gen_scene(&t, &s, 0).unwrap();
        let tax = Taxonomy::default();
        let g20 = layers.scl.spec();
        let (mut clear, mut agree) = (0, 0);
        for r in 0..g20.height {
            for c in 0..g20.width {
                let code = layers.scl.at(r, c) as u8;
                if code == CLOUD_SCL {
                    continue;
                }
                // Every 10 m pixel is checked against its block's code, so
                // mixed boundary blocks count partially.
                for k in 0..4 {
                    clear += 1;
                    if tax.agrees(t.at(2 * r + k / 2, 2 * c + k % 2), code) {
                        agree += 1;
                    }
                }
            }
        }
        assert!(agree as f64 / clear as f64 >= 0.99, "{agree}/{clear}");
    }

    #[test]
    fn gl30_clean_is_block_mode() {
        let s = SynthSpec {
            gl30_corruption: 0.0,
            ..small(2)
        };
        let t = gen_truth(&s).unwrap();
        let g = gen_gl30_classes(&t, &s).unwrap();
        assert_eq!(g.spec().pixel_size, 30.0);
        for br in 0..g.spec().height {
            for bc in 0..g.spec().width {
                let mut counts = [0; N_CLASSES];
                for k in 0..9 {
                    counts[t.at(br * 3 + k / 3, bc * 3 + k % 3) as usize] += 1;
                }
                let max = *counts.iter().max().unwrap();
                let mode = counts.iter().position(|&c| c == max).unwrap() as u8;
                assert_eq!(g.at(br, bc), mode);
            }
        }
    }

    #[test]
    fn gl30_full_corruption_changes_every_cell() {
        let s = SynthSpec {
            gl30_corruption: 1.0,
            ..small(2)
        };
        let t = gen_truth(&s).unwrap();
        let clean = gen_gl30_classes(&t, &SynthSpec { gl30_corruption: 0.0, ..s.clone() }).unwrap();
        let dirty = gen_gl30_classes(&t, &s).unwrap();
        assert!(clean.codes().iter().zip(dirty.codes()).all(|(a, b)| a != b));
    }

    #[test]
    fn gl30_corruption_count_is_exact() {
        let s = SynthSpec {
            width: 384,
            height: 384,
            n_sites: 30,
            gl30_corruption: 0.2,
            ..small(6)
        };
        let t = gen_truth(&s).unwrap();
        let clean = gen_gl30_classes(&t, &SynthSpec { gl30_corruption: 0.0, ..s.clone() }).unwrap();
        let dirty = gen_gl30_classes(&t, &s).unwrap();
        let changed = clean.codes().iter().zip(dirty.codes()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, (0.2f64 * 128.0 * 128.0).round() as usize);
    }

    #[test]
    fn gl30_uses_canonical_legacy_codes() {
        let codes = canonical_gl30_codes(&Taxonomy::default()).unwrap();
        assert_eq!(codes, [60, 100, 50, 30, 20, 10, 90, 80]);
        let s = small(2);
        let g = gen_gl30(&gen_truth(&s).unwrap(), &s, &Taxonomy::default()).unwrap();
        assert!((0..g.len()).all(|i| codes.contains(&(g.value(i) as u8))));
    }

    #[test]
    fn reference_tile_has_every_class() {
        let t = gen_truth(&SynthSpec::reference(42)).unwrap();
        assert!(t.histogram().iter().all(|&n| n > 0), "{:?}", t.histogram());
    }

    #[test]
    fn weighted_pick_edges() {
        let w = [0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(pick_weighted(&w, 0.0), 0);
        assert_eq!(pick_weighted(&w, 0.75), 1);
        assert_eq!(pick_weighted(&w, 0.999_999_999_999), 1);
    }
}
