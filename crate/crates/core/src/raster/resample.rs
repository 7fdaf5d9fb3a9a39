//! Nearest-neighbour and bilinear regridding between aligned north-up grids.

use rayon::prelude::*;

use super::grid::{GridSpec, RasterData, RasterGrid};
use crate::error::{Error, Result};

/// Source index containing target pixel (row, col)'s center, clamped to the
/// source bounds.
#[inline]
fn source_cell(src: &GridSpec, target: &GridSpec, row: usize, col: usize) -> (usize, usize) {
    let (x, y) = target.center(row, col);
    let sc = ((x - src.origin_x) / src.pixel_size).floor();
    let sr = ((src.origin_y - y) / src.pixel_size).floor();
    let clamp = |v: f64, n: usize| v.max(0.0).min((n - 1) as f64) as usize;
    (clamp(sr, src.height), clamp(sc, src.width))
}

/// Nearest-neighbour regrid: each target pixel copies the source pixel whose
/// cell contains the target center. Dtype and nodata carry over unchanged.
pub fn resample_nearest(src: &RasterGrid, target: &GridSpec) -> Result<RasterGrid> {
    if src.is_empty() {
        return Err(Error::Argument("empty source raster".into()));
    }
    target.validate()?;
    if !src.spec().overlaps(target) {
        return Err(Error::Argument(
            "target grid does not overlap the source extent".into(),
        ));
    }
    if src.spec() == target {
        return Ok(src.clone());
    }

    let s = *src.spec();
    let index: Vec<usize> = (0..target.height)
        .into_par_iter()
        .flat_map_iter(|r| {
            (0..target.width).map(move |c| {
                let (sr, sc) = source_cell(&s, target, r, c);
                s.index(sr, sc)
            })
        })
        .collect();
    RasterGrid::new(*target, src.data().gather(&index), src.nodata())
}

/// Fractional position of a target coordinate in the source center lattice,
/// clamped to `[0, n - 1]`. Returns the lower index, the upper index and the
/// weight of the upper one.
#[inline]
fn lattice(frac: f64, n: usize) -> (usize, usize, f64) {
    let f = frac.max(0.0).min((n - 1) as f64);
    let lo = f.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    (lo, hi, f - lo as f64)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    let v = a + t * (b - a);
    v.max(a.min(b)).min(a.max(b))
}

/// Bilinear regrid into float-32.
///
/// Target centers are placed in fractional source pixel-center coordinates
/// and blended from the four surrounding source centers; positions beyond
/// the outermost centers clamp to the edge. A source pixel with nonzero
/// weight that is nodata makes the output pixel nodata.
pub fn resample_bilinear(src: &RasterGrid, target: &GridSpec) -> Result<RasterGrid> {
    if src.is_empty() {
        return Err(Error::Argument("empty source raster".into()));
    }
    target.validate()?;
    let s = *src.spec();
    let out_nodata = src.nodata().map(|v| v as f32);
    // NaN cannot flag a poisoned pixel if the source had no sentinel, but a
    // source without a sentinel never poisons anything.
    let fill = out_nodata.unwrap_or(f32::NAN);

    let values: Vec<f32> = (0..target.height)
        .into_par_iter()
        .flat_map_iter(|r| {
            (0..target.width).map(move |c| {
                let (x, y) = target.center(r, c);
                let fx = (x - s.origin_x) / s.pixel_size - 0.5;
                let fy = (s.origin_y - y) / s.pixel_size - 0.5;
                let (c0, c1, wx) = lattice(fx, s.width);
                let (r0, r1, wy) = lattice(fy, s.height);

                let taps = [
                    (r0, c0, (1.0 - wx) * (1.0 - wy)),
                    (r0, c1, wx * (1.0 - wy)),
                    (r1, c0, (1.0 - wx) * wy),
                    (r1, c1, wx * wy),
                ];
                if taps
                    .iter()
                    .any(|&(rr, cc, w)| w > 0.0 && src.is_nodata(s.index(rr, cc)))
                {
                    return fill;
                }
                let v00 = src.at(r0, c0);
                let v01 = src.at(r0, c1);
                let v10 = src.at(r1, c0);
                let v11 = src.at(r1, c1);
                let top = lerp(v00, v01, wx);
                let bottom = lerp(v10, v11, wx);
                lerp(top, bottom, wy) as f32
            })
        })
        .collect();
    RasterGrid::new(*target, RasterData::F32(values), out_nodata.map(f64::from))
}
