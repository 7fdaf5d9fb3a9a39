use crate::error::{Error, Result};
use crate::raster::{GridSpec, RasterData, RasterGrid};
use crate::taxonomy::{N_CLASSES, UNCLASSIFIED};

/// Per-pixel class codes: 0..8 for trainable classes, 255 for unclassified.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRaster {
    spec: GridSpec,
    codes: Vec<u8>,
}

impl LabelRaster {
    pub fn new(spec: GridSpec, codes: Vec<u8>) -> Result<Self> {
        spec.validate()?;
        if codes.len() != spec.len() {
            return Err(Error::Argument(format!(
                "label raster holds {} codes but grid is {}x{}",
                codes.len(),
                spec.width,
                spec.height
            )));
        }
        if let Some(bad) = codes
            .iter()
            .find(|&&c| c as usize >= N_CLASSES && c != UNCLASSIFIED)
        {
            return Err(Error::Argument(format!("invalid class code {bad} in label raster")));
        }
        Ok(LabelRaster { spec, codes })
    }

    pub fn unclassified(spec: GridSpec) -> Self {
        LabelRaster {
            codes: vec![UNCLASSIFIED; spec.len()],
            spec,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.codes[i]
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> u8 {
        self.codes[self.spec.index(row, col)]
    }

    pub fn labeled_count(&self) -> usize {
        self.codes.iter().filter(|&&c| c != UNCLASSIFIED).count()
    }

    /// Pixel count per trainable class.
    pub fn histogram(&self) -> [u64; N_CLASSES] {
        let mut h = [0u64; N_CLASSES];
        for &c in &self.codes {
            if (c as usize) < N_CLASSES {
                h[c as usize] += 1;
            }
        }
        h
    }

    /// u8 raster with 255 as nodata.
    pub fn to_grid(&self) -> RasterGrid {
        RasterGrid::new(self.spec, RasterData::U8(self.codes.clone()), Some(UNCLASSIFIED as f64))
            .expect("label raster is always a valid u8 grid")
    }

    pub fn from_grid(grid: &RasterGrid) -> Result<Self> {
        let codes = match grid.data() {
            RasterData::U8(v) => v.clone(),
            _ => {
                return Err(Error::Argument(format!(
                    "label rasters are u8, got {:?}",
                    grid.dtype()
                )))
            }
        };
        LabelRaster::new(*grid.spec(), codes)
    }
}
