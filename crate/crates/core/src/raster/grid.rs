use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of a north-up grid with square pixels.
///
/// `origin_x`/`origin_y` locate the top-left corner of pixel (0, 0). Row
/// index grows southward, so pixel (r, c) has its center at
/// `(origin_x + (c + 0.5) * pixel_size, origin_y - (r + 0.5) * pixel_size)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size: f64,
}

impl GridSpec {
    pub fn new(
        width: usize,
        height: usize,
        origin_x: f64,
        origin_y: f64,
        pixel_size: f64,
    ) -> Result<Self> {
        let spec = GridSpec {
            width,
            height,
            origin_x,
            origin_y,
            pixel_size,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Argument(format!(
                "grid must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.pixel_size > 0.0 && self.pixel_size.is_finite()) {
            return Err(Error::Argument(format!(
                "pixel size must be positive, got {}",
                self.pixel_size
            )));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::Argument("grid origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Map coordinates of the center of pixel (row, col).
    #[inline]
    pub fn center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.pixel_size,
            self.origin_y - (row as f64 + 0.5) * self.pixel_size,
        )
    }

    /// (min_x, min_y, max_x, max_y)
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        (
            self.origin_x,
            self.origin_y - self.height as f64 * self.pixel_size,
            self.origin_x + self.width as f64 * self.pixel_size,
            self.origin_y,
        )
    }

    pub fn overlaps(&self, other: &GridSpec) -> bool {
        let (ax0, ay0, ax1, ay1) = self.extent();
        let (bx0, by0, bx1, by1) = other.extent();
        ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1
    }

    /// Same footprint at a different pixel size.
    pub fn with_pixel_size(&self, pixel_size: f64) -> GridSpec {
        let scale = self.pixel_size / pixel_size;
        GridSpec {
            width: (self.width as f64 * scale).round() as usize,
            height: (self.height as f64 * scale).round() as usize,
            origin_x: self.origin_x,
            origin_y: self.origin_y,
            pixel_size,
        }
    }
}

/// Element type of a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DType {
    U8,
    U16,
    I16,
    F32,
}

impl DType {
    pub fn code(self) -> u8 {
        match self {
            DType::U8 => 0,
            DType::U16 => 1,
            DType::I16 => 2,
            DType::F32 => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DType::U8),
            1 => Ok(DType::U16),
            2 => Ok(DType::I16),
            3 => Ok(DType::F32),
            other => Err(Error::UnsupportedDtype(other)),
        }
    }

    pub fn size(self) -> usize {
        match self {
            DType::U8 => 1,
            DType::U16 | DType::I16 => 2,
            DType::F32 => 4,
        }
    }

    fn holds(self, v: f64) -> bool {
        match self {
            DType::U8 => v.fract() == 0.0 && (0.0..=u8::MAX as f64).contains(&v),
            DType::U16 => v.fract() == 0.0 && (0.0..=u16::MAX as f64).contains(&v),
            DType::I16 => v.fract() == 0.0 && (i16::MIN as f64..=i16::MAX as f64).contains(&v),
            DType::F32 => v.is_nan() || (v as f32) as f64 == v,
        }
    }
}

/// Typed pixel storage, row-major.
#[derive(Debug, Clone, PartialEq)]
pub enum RasterData {
    U8(Vec<u8>),
    U16(Vec<u16>),
    I16(Vec<i16>),
    F32(Vec<f32>),
}

impl RasterData {
    pub fn dtype(&self) -> DType {
        match self {
            RasterData::U8(_) => DType::U8,
            RasterData::U16(_) => DType::U16,
            RasterData::I16(_) => DType::I16,
            RasterData::F32(_) => DType::F32,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            RasterData::U8(v) => v.len(),
            RasterData::U16(v) => v.len(),
            RasterData::I16(v) => v.len(),
            RasterData::F32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        match self {
            RasterData::U8(v) => v[i] as f64,
            RasterData::U16(v) => v[i] as f64,
            RasterData::I16(v) => v[i] as f64,
            RasterData::F32(v) => v[i] as f64,
        }
    }

    /// Gather `indices` into a new buffer of the same type.
    pub(crate) fn gather(&self, indices: &[usize]) -> RasterData {
        match self {
            RasterData::U8(v) => RasterData::U8(indices.iter().map(|&i| v[i]).collect()),
            RasterData::U16(v) => RasterData::U16(indices.iter().map(|&i| v[i]).collect()),
            RasterData::I16(v) => RasterData::I16(indices.iter().map(|&i| v[i]).collect()),
            RasterData::F32(v) => RasterData::F32(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Single-band raster.
///
/// Equality is bitwise on the payload and nodata value, so two grids that
/// both hold NaN at the same place compare equal.
#[derive(Debug, Clone)]
pub struct RasterGrid {
    spec: GridSpec,
    nodata: Option<f64>,
    data: RasterData,
}

impl RasterGrid {
    pub fn new(spec: GridSpec, data: RasterData, nodata: Option<f64>) -> Result<Self> {
        spec.validate()?;
        if data.len() != spec.len() {
            return Err(Error::Argument(format!(
                "raster holds {} values but grid is {}x{}",
                data.len(),
                spec.width,
                spec.height
            )));
        }
        if let Some(nd) = nodata {
            if !data.dtype().holds(nd) {
                return Err(Error::Argument(format!(
                    "nodata {nd} is not representable as {:?}",
                    data.dtype()
                )));
            }
        }
        let grid = RasterGrid { spec, nodata, data };
        if let RasterData::F32(values) = &grid.data {
            if let Some(i) = values
                .iter()
                .position(|v| !v.is_finite() && !grid.is_nodata_value(*v as f64))
            {
                return Err(Error::Argument(format!(
                    "non-finite value {} at element {i} is not the nodata sentinel",
                    values[i]
                )));
            }
        }
        Ok(grid)
    }

    pub fn from_u8(spec: GridSpec, values: Vec<u8>, nodata: Option<u8>) -> Result<Self> {
        Self::new(spec, RasterData::U8(values), nodata.map(f64::from))
    }

    pub fn from_u16(spec: GridSpec, values: Vec<u16>, nodata: Option<u16>) -> Result<Self> {
        Self::new(spec, RasterData::U16(values), nodata.map(f64::from))
    }

    pub fn from_i16(spec: GridSpec, values: Vec<i16>, nodata: Option<i16>) -> Result<Self> {
        Self::new(spec, RasterData::I16(values), nodata.map(f64::from))
    }

    pub fn from_f32(spec: GridSpec, values: Vec<f32>, nodata: Option<f32>) -> Result<Self> {
        Self::new(spec, RasterData::F32(values), nodata.map(f64::from))
    }

    /// Constant raster.
    pub fn filled(spec: GridSpec, dtype: DType, value: f64, nodata: Option<f64>) -> Result<Self> {
        let n = spec.len();
        let data = match dtype {
            DType::U8 => RasterData::U8(vec![value as u8; n]),
            DType::U16 => RasterData::U16(vec![value as u16; n]),
            DType::I16 => RasterData::I16(vec![value as i16; n]),
            DType::F32 => RasterData::F32(vec![value as f32; n]),
        };
        Self::new(spec, data, nodata)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn nodata(&self) -> Option<f64> {
        self.nodata
    }

    pub fn data(&self) -> &RasterData {
        &self.data
    }

    pub fn into_data(self) -> RasterData {
        self.data
    }

    pub fn width(&self) -> usize {
        self.spec.width
    }

    pub fn height(&self) -> usize {
        self.spec.height
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    /// Value at flat index `i` as f64.
    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.data.get(i)
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data.get(self.spec.index(row, col))
    }

    #[inline]
    fn is_nodata_value(&self, v: f64) -> bool {
        match self.nodata {
            Some(nd) if nd.is_nan() => v.is_nan(),
            Some(nd) => v == nd,
            None => false,
        }
    }

    #[inline]
    pub fn is_nodata(&self, i: usize) -> bool {
        self.nodata.is_some() && self.is_nodata_value(self.data.get(i))
    }

    /// Value at `i`, or `None` where it equals the nodata sentinel.
    #[inline]
    pub fn valid_value(&self, i: usize) -> Option<f64> {
        let v = self.data.get(i);
        if self.is_nodata_value(v) {
            None
        } else {
            Some(v)
        }
    }

    /// All values converted to f32 (exact for every supported dtype).
    pub fn to_f32_vec(&self) -> Vec<f32> {
        match &self.data {
            RasterData::U8(v) => v.iter().map(|&x| x as f32).collect(),
            RasterData::U16(v) => v.iter().map(|&x| x as f32).collect(),
            RasterData::I16(v) => v.iter().map(|&x| x as f32).collect(),
            RasterData::F32(v) => v.clone(),
        }
    }

    /// Non-nodata (min, max), or `None` if every pixel is nodata.
    pub fn min_max(&self) -> Option<(f64, f64)> {
        (0..self.len())
            .filter_map(|i| self.valid_value(i))
            .fold(None, |acc, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }
}

impl PartialEq for RasterGrid {
    fn eq(&self, other: &Self) -> bool {
        let nodata_eq = match (self.nodata, other.nodata) {
            (None, None) => true,
            (Some(a), Some(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        };
        let data_eq = match (&self.data, &other.data) {
            (RasterData::F32(a), RasterData::F32(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (a, b) => a == b,
        };
        self.spec == other.spec && nodata_eq && data_eq
    }
}
