// Fixtures behind the checked-in golden files.

use terralabel::forest::{train_forest, ForestModel, ForestParams, Samples, TrainingMeta};
use terralabel::raster::{GridSpec, RasterGrid};
use terralabel::rng::Rng64;
use terralabel::N_CLASSES;

pub const GOLDEN_RBIN: &str = "golden.rbin";
pub const GOLDEN_RFM: &str = "golden.rfm";

pub fn golden_raster() -> RasterGrid {
    let spec = GridSpec::new(3, 2, 500_000.0, 5_000_000.0, 10.0).unwrap();
    RasterGrid::from_i16(spec, vec![-9999, 0, 1, -1, 32767, -32768], Some(-9999)).unwrap()
}

/// Expected RBIN header of `golden_raster`, byte by byte.
pub fn golden_rbin_header() -> [u8; 64] {
    let mut h = [0u8; 64];
    h[0..4].copy_from_slice(b"RBN1");
    h[4] = 2; // i16
    h[5] = 1; // nodata present
    h[8..12].copy_from_slice(&[3, 0, 0, 0]);
    h[12..16].copy_from_slice(&[2, 0, 0, 0]);
    h[16..24].copy_from_slice(&[0x00, 0x00, 0x00, 0x00, 0x80, 0x84, 0x1e, 0x41]);
    h[24..32].copy_from_slice(&[0x00, 0x00, 0x00, 0x00, 0xd0, 0x12, 0x53, 0x41]);
    h[32..40].copy_from_slice(&[0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x24, 0x40]);
    h[40..48].copy_from_slice(&[0x00, 0x00, 0x00, 0x00, 0x80, 0x87, 0xc3, 0xc0]);
    h
}

pub fn golden_rbin_payload() -> [u8; 12] {
    [0xf1, 0xd8, 0x00, 0x00, 0x01, 0x00, 0xff, 0xff, 0xff, 0x7f, 0x00, 0x80]
}

pub fn golden_params() -> ForestParams {
    ForestParams {
        n_trees: 3,
        max_depth: Some(4),
        min_samples_split: 2,
        features_per_split: 3,
        bootstrap: true,
    }
}

pub fn golden_model() -> ForestModel {
    let mut rng = Rng64::new(11);
    let n = 40;
    let mut x = Vec::with_capacity(n * 10);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = (i % 4) as u8;
        y.push(class);
        for b in 0..10 {
            x.push((0.1 * class as f64 + 0.05 * b as f64 + 0.2 * rng.unit_f64()) as f32);
        }
    }
    let mut counts = [0u64; N_CLASSES];
    y.iter().for_each(|&c| counts[c as usize] += 1);
    let samples = Samples::new(&x, &y, 10).unwrap();
    let meta = TrainingMeta {
        scene_id: "GOLDEN_S00".into(),
        seed: 5,
        class_counts: counts,
    };
    train_forest(&samples, &golden_params(), 5, meta).unwrap()
}

/// Expected RFM bytes up to the band table.
pub fn golden_rfm_prefix() -> Vec<u8> {
    let mut p = b"RFM1".to_vec();
    p.extend_from_slice(&[3, 0, 0, 0]); // n_trees
    p.extend_from_slice(&[1, 4, 0, 0, 0]); // max_depth Some(4)
    p.extend_from_slice(&[2, 0, 0, 0]); // min_samples_split
    p.extend_from_slice(&[3, 0, 0, 0]); // features_per_split
    p.push(1); // bootstrap
    p.extend_from_slice(&[8, 0, 1, 2, 3, 4, 5, 6, 7]);
    p.push(10);
    for name in ["B02", "B03", "B04", "B08", "B05", "B06", "B07", "B8A", "B11", "B12"] {
        p.push(3);
        p.extend_from_slice(name.as_bytes());
    }
    p.extend_from_slice(&[10, 0, 0, 0]);
    p.extend_from_slice(b"GOLDEN_S00");
    p.extend_from_slice(&[5, 0, 0, 0, 0, 0, 0, 0]);
    p
}
