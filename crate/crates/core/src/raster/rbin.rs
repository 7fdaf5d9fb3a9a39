//! RBIN: single-band raster container.
//!
//! Little-endian, 64-byte header followed by the row-major payload in the
//! native dtype:
//!
//! | bytes  | field                                   |
//! |--------|-----------------------------------------|
//! | 0..4   | magic `RBN1`                            |
//! | 4      | dtype code (0=u8, 1=u16, 2=i16, 3=f32)  |
//! | 5      | nodata-present flag (0/1)               |
//! | 6..8   | reserved, zero                          |
//! | 8..12  | width (u32)                             |
//! | 12..16 | height (u32)                            |
//! | 16..24 | origin_x (f64)                          |
//! | 24..32 | origin_y (f64)                          |
//! | 32..40 | pixel_size (f64)                        |
//! | 40..48 | nodata as f64 (ignored if flag is 0)    |
//! | 48..64 | reserved, zero                          |

use std::fs;
use std::path::Path;

use super::grid::{DType, GridSpec, RasterData, RasterGrid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RBN1";
pub const HEADER_LEN: usize = 64;

pub fn encode_rbin(grid: &RasterGrid) -> Vec<u8> {
    let spec = grid.spec();
    let dtype = grid.dtype();
    let mut out = Vec::with_capacity(HEADER_LEN + grid.len() * dtype.size());
    out.extend_from_slice(MAGIC);
    out.push(dtype.code());
    out.push(grid.nodata().is_some() as u8);
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(spec.width as u32).to_le_bytes());
    out.extend_from_slice(&(spec.height as u32).to_le_bytes());
    out.extend_from_slice(&spec.origin_x.to_le_bytes());
    out.extend_from_slice(&spec.origin_y.to_le_bytes());
    out.extend_from_slice(&spec.pixel_size.to_le_bytes());
    out.extend_from_slice(&grid.nodata().unwrap_or(0.0).to_le_bytes());
    out.extend_from_slice(&[0u8; 16]);
    debug_assert_eq!(out.len(), HEADER_LEN);

    match grid.data() {
        RasterData::U8(v) => out.extend_from_slice(v),
        RasterData::U16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        RasterData::I16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        RasterData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    out
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn le_f64(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode_rbin(bytes: &[u8]) -> Result<RasterGrid> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing RBN1 magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Length {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let dtype = DType::from_code(bytes[4])?;
    let has_nodata = match bytes[5] {
        0 => false,
        1 => true,
        f => return Err(Error::Format(format!("bad nodata flag {f}"))),
    };
    let spec = GridSpec {
        width: le_u32(bytes, 8) as usize,
        height: le_u32(bytes, 12) as usize,
        origin_x: le_f64(bytes, 16),
        origin_y: le_f64(bytes, 24),
        pixel_size: le_f64(bytes, 32),
    };
    let nodata = has_nodata.then(|| le_f64(bytes, 40));

    let n = spec.len();
    let expected = HEADER_LEN + n * dtype.size();
    if bytes.len() != expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    let payload = &bytes[HEADER_LEN..];
    let data = match dtype {
        DType::U8 => RasterData::U8(payload.to_vec()),
        DType::U16 => RasterData::U16(
            payload
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
        DType::I16 => RasterData::I16(
            payload
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]))
                .collect(),
        ),
        DType::F32 => RasterData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        ),
    };
    RasterGrid::new(spec, data, nodata)
}

/// Write `grid` to `path`; returns the number of bytes written.
pub fn write_rbin(grid: &RasterGrid, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let bytes = encode_rbin(grid);
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(bytes.len())
}

pub fn read_rbin(path: impl AsRef<Path>) -> Result<RasterGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_rbin(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(w: usize, h: usize) -> GridSpec {
        GridSpec::new(w, h, 500_000.0, 4_100_000.0, 10.0).unwrap()
    }

    #[test]
    fn one_pixel_f32_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.rbin");
        let g = RasterGrid::from_f32(spec(1, 1), vec![0.5], None).unwrap();
        assert_eq!(write_rbin(&g, &p).unwrap(), 68);
        assert_eq!(read_rbin(&p).unwrap(), g);
    }

    #[test]
    fn u8_round_trip_preserves_spec() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.rbin");
        let g = RasterGrid::from_u8(spec(2, 2), vec![1, 2, 3, 4], Some(255)).unwrap();
        assert_eq!(write_rbin(&g, &p).unwrap(), 68);
        let back = read_rbin(&p).unwrap();
        assert_eq!(back.spec(), g.spec());
        assert_eq!(back, g);
    }

    #[test]
    fn byte_counts() {
        let g = RasterGrid::from_u8(spec(1, 1), vec![9], None).unwrap();
        assert_eq!(encode_rbin(&g).len(), 65);
        let g = RasterGrid::from_f32(spec(2, 2), vec![0.0; 4], None).unwrap();
        assert_eq!(encode_rbin(&g).len(), 80);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode_rbin(&RasterGrid::from_u8(spec(1, 1), vec![1], None).unwrap());
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_rbin(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload() {
        let bytes = encode_rbin(&RasterGrid::from_u16(spec(3, 3), vec![7; 9], None).unwrap());
        assert!(matches!(
            decode_rbin(&bytes[..bytes.len() - 1]),
            Err(Error::Length { .. })
        ));
        assert!(matches!(decode_rbin(&bytes[..20]), Err(Error::Length { .. })));
    }

    #[test]
    fn unknown_dtype() {
        let mut bytes = encode_rbin(&RasterGrid::from_u8(spec(1, 1), vec![1], None).unwrap());
        bytes[4] = 9;
        assert!(matches!(decode_rbin(&bytes), Err(Error::UnsupportedDtype(9))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_rbin("/nonexistent/x.rbin"),
            Err(Error::Io { .. })
        ));
    }

    fn arb_grid() -> impl Strategy<Value = RasterGrid> {
        (1usize..9, 1usize..9, -1e6f64..1e6, -1e6f64..1e6, 0.5f64..100.0, 0u8..4, any::<bool>())
            .prop_flat_map(|(w, h, ox, oy, ps, code, has_nd)| {
                let spec = GridSpec::new(w, h, ox, oy, ps).unwrap();
                let n = w * h;
                let data: BoxedStrategy<(RasterData, Option<f64>)> = match code {
                    0 => proptest::collection::vec(any::<u8>(), n)
                        .prop_map(move |v| (RasterData::U8(v), has_nd.then_some(0.0)))
                        .boxed(),
                    1 => proptest::collection::vec(any::<u16>(), n)
                        .prop_map(move |v| (RasterData::U16(v), has_nd.then_some(65535.0)))
                        .boxed(),
                    2 => proptest::collection::vec(any::<i16>(), n)
                        .prop_map(move |v| (RasterData::I16(v), has_nd.then_some(-9999.0)))
                        .boxed(),
                    _ => proptest::collection::vec(-1e30f32..1e30, n)
                        .prop_map(move |v| (RasterData::F32(v), has_nd.then_some(-3.0e38f32 as f64)))
                        .boxed(),
                };
                data.prop_map(move |(d, nd)| RasterGrid::new(spec, d, nd).unwrap())
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(g in arb_grid()) {
            let bytes = encode_rbin(&g);
            prop_assert_eq!(bytes.len(), HEADER_LEN + g.len() * g.dtype().size());
            let back = decode_rbin(&bytes).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(encode_rbin(&back), bytes);
        }
    }
}
