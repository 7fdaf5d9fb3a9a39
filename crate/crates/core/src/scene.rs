//! Scene manifests and the aligned 10 m feature stack built from them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{read_rbin, resample_bilinear, resample_nearest, GridSpec, RasterGrid};

pub const N_BANDS: usize = 10;

/// Feature order: the four 10 m bands, then the six 20 m bands.
pub const BAND_NAMES: [&str; N_BANDS] = [
    "B02", "B03", "B04", "B08", "B05", "B06", "B07", "B8A", "B11", "B12",
];

/// Native resolution of each band in `BAND_NAMES` order.
pub const BAND_RESOLUTIONS: [u32; N_BANDS] = [10, 10, 10, 10, 20, 20, 20, 20, 20, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandFile {
    pub path: PathBuf,
    pub resolution: u32,
}

/// One acquisition as described on disk. Relative paths are resolved
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneManifest {
    pub scene_id: String,
    pub tile_id: String,
    pub datetime: DateTime<Utc>,
    pub band_paths: BTreeMap<String, BandFile>,
    pub scl_path: PathBuf,
    pub cloud_conf_path: PathBuf,
}

impl SceneManifest {
    pub fn validate(&self) -> Result<()> {
        for (name, res) in BAND_NAMES.iter().zip(BAND_RESOLUTIONS) {
            match self.band_paths.get(*name) {
                None => return Err(Error::Manifest(format!("{}: missing band {name}", self.scene_id))),
                Some(b) if b.resolution != res => {
                    return Err(Error::Manifest(format!(
                        "{}: band {name} declared at {} m, expected {res} m",
                        self.scene_id, b.resolution
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = self
            .band_paths
            .keys()
            .find(|k| !BAND_NAMES.contains(&k.as_str()))
        {
            return Err(Error::Manifest(format!("{}: unexpected band {extra}", self.scene_id)));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: SceneManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if let Some(base) = path.parent() {
            manifest.resolve_paths(base);
        }
        manifest.validate()?;
        Ok(manifest)
    }

    /// Make every relative path absolute with respect to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.band_paths.values_mut().for_each(|b| fix(&mut b.path));
        fix(&mut self.scl_path);
        fix(&mut self.cloud_conf_path);
    }

    pub fn band_path(&self, index: usize) -> &Path {
        &self.band_paths[BAND_NAMES[index]].path
    }
}

/// A scene with every layer on one 10 m grid.
///
/// Features are stored pixel-major (`N_BANDS` consecutive values per
/// pixel); `present[i]` is false where any band is nodata.
#[derive(Debug, Clone)]
pub struct Scene {
    pub scene_id: String,
    pub tile_id: String,
    pub datetime: DateTime<Utc>,
    spec: GridSpec,
    features: Vec<f32>,
    present: Vec<bool>,
    scl: Vec<u8>,
    cloud_conf: RasterGrid,
}

impl Scene {
    /// Assemble from layers already on a common grid.
    pub fn new(
        scene_id: impl Into<String>,
        tile_id: impl Into<String>,
        datetime: DateTime<Utc>,
        bands: &[RasterGrid],
        scl: &RasterGrid,
        cloud_conf: RasterGrid,
    ) -> Result<Self> {
        if bands.len() != N_BANDS {
            return Err(Error::Argument(format!(
                "expected {N_BANDS} bands, got {}",
                bands.len()
            )));
        }
        let spec = *bands[0].spec();
        for (name, b) in BAND_NAMES.iter().zip(bands) {
            if b.spec() != &spec {
                return Err(Error::Alignment(format!("band {name} is not on the scene grid")));
            }
        }
        if scl.spec() != &spec || cloud_conf.spec() != &spec {
            return Err(Error::Alignment(
                "scene classification and cloud layers must share the band grid".into(),
            ));
        }
        let n = spec.len();
        let mut features = vec![0f32; n * N_BANDS];
        let mut present = vec![true; n];
        for (b, band) in bands.iter().enumerate() {
            for i in 0..n {
                match band.valid_value(i) {
                    Some(v) => features[i * N_BANDS + b] = v as f32,
                    None => present[i] = false,
                }
            }
        }
        let scl = (0..n)
            .map(|i| match scl.valid_value(i) {
                Some(v) if (0.0..12.0).contains(&v) => v as u8,
                _ => 0,
            })
            .collect();
        Ok(Scene {
            scene_id: scene_id.into(),
            tile_id: tile_id.into(),
            datetime,
            spec,
            features,
            present,
            scl,
            cloud_conf,
        })
    }

    /// Read every layer named by `manifest` and bring it onto the grid of
    /// the first 10 m band: 20 m bands bilinearly, SCL and cloud confidence
    /// by nearest neighbour.
    pub fn load(manifest: &SceneManifest) -> Result<Self> {
        manifest.validate()?;
        let reference = read_rbin(manifest.band_path(0))?;
        let spec = *reference.spec();
        let mut bands = Vec::with_capacity(N_BANDS);
        bands.push(reference);
        for i in 1..N_BANDS {
            let raw = read_rbin(manifest.band_path(i))?;
            let band = if BAND_RESOLUTIONS[i] == 10 {
                if raw.spec() != &spec {
                    return Err(Error::Alignment(format!(
                        "{}: band {} does not share the B02 grid",
                        manifest.scene_id, BAND_NAMES[i]
                    )));
                }
                raw
            } else {
                resample_bilinear(&raw, &spec)?
            };
            bands.push(band);
        }
        let scl = resample_nearest(&read_rbin(&manifest.scl_path)?, &spec)?;
        let cloud = resample_nearest(&read_rbin(&manifest.cloud_conf_path)?, &spec)?;
        Scene::new(
            manifest.scene_id.clone(),
            manifest.tile_id.clone(),
            manifest.datetime,
            &bands,
            &scl,
            cloud,
        )
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Feature vector at flat index `i`, or `None` if any band is nodata.
    #[inline]
    pub fn features(&self, i: usize) -> Option<&[f32]> {
        self.present[i].then(|| &self.features[i * N_BANDS..(i + 1) * N_BANDS])
    }

    /// SCL code at `i`; nodata and out-of-range values read as 0.
    #[inline]
    pub fn scl(&self, i: usize) -> u8 {
        self.scl[i]
    }

    /// Cloud confidence at `i`, `None` where nodata.
    #[inline]
    pub fn cloud_conf(&self, i: usize) -> Option<f64> {
        self.cloud_conf.valid_value(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{write_rbin, RasterGrid};

    fn manifest_json() -> serde_json::Value {
        let mut bands = serde_json::Map::new();
        for (n, r) in BAND_NAMES.iter().zip(BAND_RESOLUTIONS) {
            bands.insert(
                n.to_string(),
                serde_json::json!({"path": format!("{n}.rbin"), "resolution": r}),
            );
        }
        serde_json::json!({
            "scene_id": "S1", "tile_id": "T", "datetime": "2017-08-01T10:30:00Z",
            "band_paths": bands, "scl_path": "SCL.rbin", "cloud_conf_path": "CLD.rbin"
        })
    }

    #[test]
    fn missing_band_is_a_manifest_error() {
        let mut v = manifest_json();
        v["band_paths"].as_object_mut().unwrap().remove("B8A");
        let m: SceneManifest = serde_json::from_value(v).unwrap();
        assert!(matches!(m.validate(), Err(Error::Manifest(_))));
    }

    #[test]
    fn wrong_resolution_is_a_manifest_error() {
        let mut v = manifest_json();
        v["band_paths"]["B11"]["resolution"] = 10.into();
        let m: SceneManifest = serde_json::from_value(v).unwrap();
        assert!(m.validate().is_err());
    }

    #[test]
    fn loads_and_aligns_layers() {
        let dir = tempfile::tempdir().unwrap();
        let s10 = GridSpec::new(4, 4, 0.0, 40.0, 10.0).unwrap();
        let s20 = GridSpec::new(2, 2, 0.0, 40.0, 20.0).unwrap();
        for (i, n) in BAND_NAMES.iter().enumerate() {
            let g = if BAND_RESOLUTIONS[i] == 10 {
                RasterGrid::from_u16(s10, vec![100 + i as u16; 16], Some(0)).unwrap()
            } else {
                RasterGrid::from_f32(s20, vec![0.5; 4], None).unwrap()
            };
            write_rbin(&g, dir.path().join(format!("{n}.rbin"))).unwrap();
        }
        write_rbin(
            &RasterGrid::from_u8(s20, vec![4, 6, 9, 5], None).unwrap(),
            dir.path().join("SCL.rbin"),
        )
        .unwrap();
        write_rbin(
            &RasterGrid::from_u8(s20, vec![0, 0, 100, 0], None).unwrap(),
            dir.path().join("CLD.rbin"),
        )
        .unwrap();
        let mpath = dir.path().join("manifest.json");
        fs::write(&mpath, manifest_json().to_string()).unwrap();

        let m = SceneManifest::load(&mpath).unwrap();
        let scene = Scene::load(&m).unwrap();
        assert_eq!(scene.spec(), &s10);
        assert_eq!(scene.features(0).unwrap()[0], 100.0);
        assert_eq!(scene.features(5).unwrap()[9], 0.5);
        assert_eq!(scene.scl(s10.index(0, 3)), 6);
        assert_eq!(scene.scl(s10.index(3, 0)), 9);
        assert_eq!(scene.cloud_conf(s10.index(2, 1)), Some(100.0));
    }
}
