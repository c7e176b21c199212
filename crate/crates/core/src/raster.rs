//! Raster containers shared by every stage.
//!
//! [`MultiBandRaster`] stores samples band-sequential: all of band 0 in
//! row-major order, then band 1, and so on. This is also the on-disk layout.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A `width × height × bands` grid of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiBandRaster {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f64>,
}

impl MultiBandRaster {
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::EmptyDimensions);
        }
        let expected = width * height * bands;
        if data.len() != expected {
            return Err(Error::Size {
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            bands,
            data,
        })
    }

    /// Stacks single bands of equal size.
    pub fn from_bands(bands: &[Band]) -> Result<Self> {
        let first = bands.first().ok_or(Error::EmptyDimensions)?;
        let mut data = Vec::with_capacity(first.len() * bands.len());
        for b in bands {
            if b.width() != first.width() || b.height() != first.height() {
                return Err(Error::Size {
                    expected: first.len(),
                    actual: b.len(),
                });
            }
            data.extend_from_slice(b.as_slice());
        }
        Self::new(first.width(), first.height(), bands.len(), data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, band: usize) -> f64 {
        self.data[band * self.pixels() + y * self.width + x]
    }

    /// Row-major samples of one band.
    pub fn band_slice(&self, band: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[band * n..(band + 1) * n]
    }

    pub fn band(&self, band: usize) -> Band {
        Band {
            width: self.width,
            height: self.height,
            data: self.band_slice(band).to_vec(),
        }
    }

    pub fn check_band(&self, band: usize) -> Result<()> {
        if band < self.bands {
            Ok(())
        } else {
            Err(Error::BandIndex {
                index: band,
                bands: self.bands,
            })
        }
    }

    /// `(min, max)` of every band.
    pub fn band_ranges(&self) -> Vec<(f64, f64)> {
        (0..self.bands)
            .map(|b| min_max(self.band_slice(b)))
            .collect()
    }

    /// Applies `f` to every band independently.
    pub fn map_bands(&self, mut f: impl FnMut(&Band) -> Band) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for b in 0..self.bands {
            data.extend_from_slice(f(&self.band(b)).as_slice());
        }
        Self {
            width: self.width,
            height: self.height,
            bands: self.bands,
            data,
        }
    }
}

/// Min-max scales every band to `[0, 1]`; a constant band becomes all zeros.
pub fn normalize_bands(r: &MultiBandRaster) -> MultiBandRaster {
    r.map_bands(|b| {
        let (lo, hi) = min_max(b.as_slice());
        let span = hi - lo;
        let data = b
            .as_slice()
            .iter()
            .map(|&v| if span > 0.0 { scale_unit(v, lo, span) } else { 0.0 })
            .collect();
        Band::from_parts(b.width(), b.height(), data)
    })
}

/// `(v - lo) / span` clamped into `[0, 1]` against rounding.
#[inline]
pub(crate) fn scale_unit(v: f64, lo: f64, span: f64) -> f64 {
    ((v - lo) / span).clamp(0.0, 1.0)
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// A single-channel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Band {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions);
        }
        if data.len() != width * height {
            return Err(Error::Size {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    // Internal constructor for outputs whose shape comes from a valid band.
    pub(crate) fn from_parts(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.data)
    }

    /// Pointwise `f(self, other)`. Panics on mismatched shapes.
    pub fn zip_with(&self, other: &Band, f: impl Fn(f64, f64) -> f64) -> Band {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Band::from_parts(self.width, self.height, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Band {
        Band::from_parts(
            self.width,
            self.height,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Per-pixel segment labels. `0` is reserved for "unlabeled"; cluster `c`
/// is written as `c + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelRaster {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl LabelRaster {
    pub const UNLABELED: u16 = 0;

    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyDimensions);
        }
        if data.len() != width * height {
            return Err(Error::Size {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u16> {
        self.data
    }

    /// Sorted distinct label values.
    pub fn distinct(&self) -> Vec<u16> {
        let mut v = self.data.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}
