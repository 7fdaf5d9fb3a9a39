//! Leaf land-cover classes, legacy 30 m codes, Level-2A scene-classification
//! codes and the tables relating them.
//!
//! All three tables can be replaced by a JSON override file:
//!
//! ```json
//! {
//!   "gl30_map": { "10": "CultivatedVegetation", "20": "WoodyVegetation" },
//!   "compatibility": { "Water": [6], "Wetland": [4, 6] },
//!   "usable_scl": [2, 3, 4, 5, 6, 7, 11]
//! }
//! ```
//!
//! Any section left out keeps its built-in default. A partial `gl30_map` or
//! `compatibility` replaces only the listed keys.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of trainable classes.
pub const N_CLASSES: usize = 8;

/// Class code for pixels without a trainable class.
pub const UNCLASSIFIED: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LcClass {
    Water,
    SnowIce,
    Wetland,
    SemiNaturalVegetation,
    WoodyVegetation,
    CultivatedVegetation,
    NaturalBareGround,
    ArtificialBareGround,
    Unclassified,
}

impl LcClass {
    pub const TRAINABLE: [LcClass; N_CLASSES] = [
        LcClass::Water,
        LcClass::SnowIce,
        LcClass::Wetland,
        LcClass::SemiNaturalVegetation,
        LcClass::WoodyVegetation,
        LcClass::CultivatedVegetation,
        LcClass::NaturalBareGround,
        LcClass::ArtificialBareGround,
    ];

    pub fn code(self) -> u8 {
        match self {
            LcClass::Unclassified => UNCLASSIFIED,
            other => other as u8,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            UNCLASSIFIED => Ok(LcClass::Unclassified),
            c if (c as usize) < N_CLASSES => Ok(Self::TRAINABLE[c as usize]),
            c => Err(Error::Mapping(format!("unknown land-cover class code {c}"))),
        }
    }

    pub fn is_trainable(self) -> bool {
        self != LcClass::Unclassified
    }

    pub fn name(self) -> &'static str {
        match self {
            LcClass::Water => "water",
            LcClass::SnowIce => "snow/ice",
            LcClass::Wetland => "wetland",
            LcClass::SemiNaturalVegetation => "(semi) natural vegetation",
            LcClass::WoodyVegetation => "woody vegetation",
            LcClass::CultivatedVegetation => "cultivated vegetation",
            LcClass::NaturalBareGround => "natural bare ground",
            LcClass::ArtificialBareGround => "artificial bare ground",
            LcClass::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for LcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// GlobeLand30 class code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gl30Code(u8);

impl Gl30Code {
    pub const ALL: [u8; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

    pub fn new(code: u8) -> Result<Self> {
        if Self::ALL.contains(&code) {
            Ok(Gl30Code(code))
        } else {
            Err(Error::Mapping(format!("unknown GlobeLand30 code {code}")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// Level-2A scene-classification (SCL) code, 0..=11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SclCode(u8);

impl SclCode {
    pub const NO_DATA: SclCode = SclCode(0);
    pub const SATURATED: SclCode = SclCode(1);
    pub const DARK_AREA: SclCode = SclCode(2);
    pub const CLOUD_SHADOW: SclCode = SclCode(3);
    pub const VEGETATION: SclCode = SclCode(4);
    pub const NOT_VEGETATED: SclCode = SclCode(5);
    pub const WATER: SclCode = SclCode(6);
    pub const UNCLASSIFIED: SclCode = SclCode(7);
    pub const CLOUD_MEDIUM: SclCode = SclCode(8);
    pub const CLOUD_HIGH: SclCode = SclCode(9);
    pub const THIN_CIRRUS: SclCode = SclCode(10);
    pub const SNOW: SclCode = SclCode(11);

    pub fn new(code: u8) -> Result<Self> {
        if code <= 11 {
            Ok(SclCode(code))
        } else {
            Err(Error::Mapping(format!("unknown scene-classification code {code}")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// Legacy-code mapping (M1), agreement matrix (C1) and usable set (U1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    gl30: BTreeMap<u8, LcClass>,
    /// Bit s of `compat[k]` set iff class k agrees with SCL code s.
    compat: [u16; N_CLASSES],
    /// Bit s set iff SCL code s is usable for prediction.
    usable: u16,
}

const fn bits(codes: &[u8]) -> u16 {
    let mut m = 0u16;
    let mut i = 0;
    while i < codes.len() {
        m |= 1 << codes[i];
        i += 1;
    }
    m
}

impl Default for Taxonomy {
    fn default() -> Self {
        use LcClass::*;
        let gl30 = [
            (10, CultivatedVegetation),
            (20, WoodyVegetation),
            (30, SemiNaturalVegetation),
            (40, WoodyVegetation),
            (50, Wetland),
            (60, Water),
            (70, SemiNaturalVegetation),
            (80, ArtificialBareGround),
            (90, NaturalBareGround),
            (100, SnowIce),
        ]
        .into_iter()
        .collect();
        let compat = [
            bits(&[6]),    // water
            bits(&[11]),   // snow/ice
            bits(&[4, 6]), // wetland
            bits(&[4]),    // semi-natural vegetation
            bits(&[4]),    // woody vegetation
            bits(&[4]),    // cultivated vegetation
            bits(&[5]),    // natural bare ground
            bits(&[5]),    // artificial bare ground
        ];
        Taxonomy {
            gl30,
            compat,
            usable: bits(&[2, 3, 4, 5, 6, 7, 11]),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaxonomyFile {
    #[serde(default)]
    gl30_map: Option<BTreeMap<String, LcClass>>,
    #[serde(default)]
    compatibility: Option<BTreeMap<LcClass, Vec<u8>>>,
    #[serde(default)]
    usable_scl: Option<Vec<u8>>,
}

impl Taxonomy {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: TaxonomyFile = serde_json::from_str(text)
            .map_err(|e| Error::Argument(format!("taxonomy override: {e}")))?;
        let mut tax = Taxonomy::default();
        if let Some(map) = file.gl30_map {
            for (key, class) in map {
                let code: u8 = key
                    .parse()
                    .map_err(|_| Error::Mapping(format!("bad GlobeLand30 key {key:?}")))?;
                Gl30Code::new(code)?;
                if !class.is_trainable() {
                    return Err(Error::Mapping(format!(
                        "GlobeLand30 code {code} must map to a trainable class"
                    )));
                }
                tax.gl30.insert(code, class);
            }
        }
        if let Some(matrix) = file.compatibility {
            for (class, codes) in matrix {
                if !class.is_trainable() {
                    return Err(Error::Mapping(
                        "compatibility rows are only defined for trainable classes".into(),
                    ));
                }
                tax.set_compatible(class, &codes)?;
            }
        }
        if let Some(codes) = file.usable_scl {
            tax.usable = 0;
            for c in codes {
                tax.usable |= 1 << SclCode::new(c)?.get();
            }
        }
        Ok(tax)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Replace the agreement row of `class`.
    pub fn set_compatible(&mut self, class: LcClass, scl_codes: &[u8]) -> Result<()> {
        if !class.is_trainable() {
            return Err(Error::Argument("unclassified has no agreement row".into()));
        }
        let mut row = 0u16;
        for &c in scl_codes {
            row |= 1 << SclCode::new(c)?.get();
        }
        self.compat[class.code() as usize] = row;
        Ok(())
    }

    pub fn compatible_codes(&self, class: LcClass) -> Vec<u8> {
        if !class.is_trainable() {
            return Vec::new();
        }
        let row = self.compat[class.code() as usize];
        (0..12).filter(|s| row & (1 << s) != 0).collect()
    }

    pub fn map_gl30(&self, code: Gl30Code) -> Result<LcClass> {
        self.gl30
            .get(&code.get())
            .copied()
            .ok_or_else(|| Error::Mapping(format!("no mapping for GlobeLand30 code {}", code.get())))
    }

    /// Map a raw legacy code; unknown codes are mapping errors.
    pub fn map_gl30_raw(&self, code: u8) -> Result<LcClass> {
        self.map_gl30(Gl30Code::new(code)?)
    }

    pub fn scl_compatible(&self, class: LcClass, scl: SclCode) -> Result<bool> {
        if !class.is_trainable() {
            return Err(Error::Argument(
                "agreement is undefined for the unclassified class".into(),
            ));
        }
        Ok(self.compat[class.code() as usize] & (1 << scl.get()) != 0)
    }

    /// Code-level agreement check for hot loops: `class` is a trainable code
    /// and `scl` any byte; out-of-range inputs are simply not compatible.
    #[inline]
    pub(crate) fn agrees(&self, class: u8, scl: u8) -> bool {
        (class as usize) < N_CLASSES && scl < 12 && self.compat[class as usize] & (1 << scl) != 0
    }

    pub fn usable_scl(&self, scl: SclCode) -> bool {
        self.usable & (1 << scl.get()) != 0
    }

    #[inline]
    pub(crate) fn usable_raw(&self, scl: u8) -> bool {
        scl < 12 && self.usable & (1 << scl) != 0
    }
}

/// SCL codes admissible for training samples.
pub const TRAINING_SCL: [u8; 4] = [4, 5, 6, 11];
