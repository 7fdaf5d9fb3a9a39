//! Raster containers, the RBIN file format and regridding kernels.

mod grid;
mod rbin;
mod resample;

pub use grid::{DType, GridSpec, RasterData, RasterGrid};
pub use rbin::{decode_rbin, encode_rbin, read_rbin, write_rbin, HEADER_LEN, MAGIC};
pub use resample::{resample_bilinear, resample_nearest};
