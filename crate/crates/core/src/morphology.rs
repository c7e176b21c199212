//! Flat grayscale morphology with edge-replicated borders.
//!
//! Besides erosion and dilation this module provides the alternating
//! sequential filter, the multiscale morphological gradient and a regional
//! minima detector working on a quantized band.

use alloc::vec;
use alloc::vec::Vec;

use crate::par::fill_rows;
use crate::raster::{min_max, Band, MultiBandRaster};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Square,
    Diamond,
}

/// A flat structuring element centered on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StructuringElement {
    pub shape: Shape,
    pub radius: usize,
}

impl StructuringElement {
    pub fn square(radius: usize) -> Self {
        Self {
            shape: Shape::Square,
            radius,
        }
    }

    pub fn diamond(radius: usize) -> Self {
        Self {
            shape: Shape::Diamond,
            radius,
        }
    }

    /// The `(dx, dy)` offsets covered, in row-major order.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = match self.shape {
                    Shape::Square => true,
                    Shape::Diamond => dx.abs() + dy.abs() <= r,
                };
                if inside {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// A per-pixel boolean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
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
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

#[derive(Clone, Copy)]
enum Extreme {
    Min,
    Max,
}

impl Extreme {
    #[inline]
    fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Extreme::Min => a.min(b),
            Extreme::Max => a.max(b),
        }
    }

    fn identity(self) -> f64 {
        match self {
            Extreme::Min => f64::INFINITY,
            Extreme::Max => f64::NEG_INFINITY,
        }
    }
}

#[inline]
fn clamp_coord(v: isize, len: usize) -> usize {
    v.clamp(0, len as isize - 1) as usize
}

// 1-D running extreme over [i - r, i + r] with replicated ends, along rows
// (horizontal) or columns.
fn line_pass(src: &[f64], w: usize, h: usize, r: usize, op: Extreme, horizontal: bool) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    let r = r as isize;
    fill_rows(&mut out, w, |y, row| {
        for (x, dst) in row.iter_mut().enumerate() {
            let mut acc = op.identity();
            for d in -r..=r {
                let v = if horizontal {
                    src[y * w + clamp_coord(x as isize + d, w)]
                } else {
                    src[clamp_coord(y as isize + d, h) * w + x]
                };
                acc = op.pick(acc, v);
            }
            *dst = acc;
        }
    });
    out
}

fn window_extreme(b: &Band, se: StructuringElement, op: Extreme) -> Band {
    let (w, h) = (b.width(), b.height());
    if se.radius == 0 {
        return b.clone();
    }
    let data = match se.shape {
        // Min/max are exact, so the separable square pass equals the 2-D scan.
        Shape::Square => {
            let rows = line_pass(b.as_slice(), w, h, se.radius, op, true);
            line_pass(&rows, w, h, se.radius, op, false)
        }
        Shape::Diamond => {
            let offsets = se.offsets();
            let src = b.as_slice();
            let mut out = vec![0.0; w * h];
            fill_rows(&mut out, w, |y, row| {
                for (x, dst) in row.iter_mut().enumerate() {
                    let mut acc = op.identity();
                    for &(dx, dy) in &offsets {
                        let sx = clamp_coord(x as isize + dx, w);
                        let sy = clamp_coord(y as isize + dy, h);
                        acc = op.pick(acc, src[sy * w + sx]);
                    }
                    *dst = acc;
                }
            });
            out
        }
    };
    Band::from_parts(w, h, data)
}

/// Pointwise minimum over the element's window.
pub fn erode(b: &Band, se: StructuringElement) -> Band {
    window_extreme(b, se, Extreme::Min)
}

/// Pointwise maximum over the element's window.
pub fn dilate(b: &Band, se: StructuringElement) -> Band {
    window_extreme(b, se, Extreme::Max)
}

pub fn opening(b: &Band, se: StructuringElement) -> Band {
    dilate(&erode(b, se), se)
}

pub fn closing(b: &Band, se: StructuringElement) -> Band {
    erode(&dilate(b, se), se)
}

/// Alternating sequential filter: for `r = 1..=max_radius`, an opening then a
/// closing with a square of radius `r`.
pub fn asf(b: &Band, max_radius: usize) -> Band {
    let mut out = b.clone();
    for r in 1..=max_radius {
        let se = StructuringElement::square(r);
        out = closing(&opening(&out, se), se);
    }
    out
}

/// [`asf`] applied to each band.
pub fn asf_raster(r: &MultiBandRaster, max_radius: usize) -> MultiBandRaster {
    r.map_bands(|b| asf(b, max_radius))
}

/// Multiscale gradient of one band:
/// `(1/n) Σ_{i=1..n} erode(dilate(f, B_i) − erode(f, B_i), B_{i−1})`
/// with `B_i` the square of radius `i`. Scales are summed in ascending order.
pub fn multiscale_gradient_band(f: &Band, n_scales: usize) -> Band {
    let mut sum = Band::filled(f.width(), f.height(), 0.0);
    for i in 1..=n_scales {
        let bi = StructuringElement::square(i);
        let diff = dilate(f, bi).zip_with(&erode(f, bi), |a, b| a - b);
        let term = erode(&diff, StructuringElement::square(i - 1));
        sum = sum.zip_with(&term, |a, b| a + b);
    }
    let n = n_scales as f64;
    sum.map(|v| v / n)
}

/// Multiscale gradient of every band, combined per pixel by maximum.
pub fn multiscale_gradient(r: &MultiBandRaster, n_scales: usize) -> Result<Band> {
    if n_scales == 0 {
        return Err(Error::InvalidParameter("n_scales must be at least 1"));
    }
    let mut out = multiscale_gradient_band(&r.band(0), n_scales);
    for b in 1..r.bands() {
        let g = multiscale_gradient_band(&r.band(b), n_scales);
        out = out.zip_with(&g, f64::max);
    }
    Ok(out)
}

/// Maps the band onto `levels` equal-width bins over `[min, max]`.
/// A constant band quantizes to all zeros.
pub fn quantize(b: &Band, levels: usize) -> Vec<u32> {
    let (lo, hi) = min_max(b.as_slice());
    let span = hi - lo;
    let top = (levels - 1) as f64;
    b.as_slice()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                libm::floor((v - lo) / span * levels as f64).clamp(0.0, top) as u32
            } else {
                0
            }
        })
        .collect()
}

pub(crate) const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Regional minima of the band quantized to `levels` bins.
///
/// A pixel is marked when its 8-connected plateau of equal quantized value has
/// no neighbor with a lower value. A constant band is one plateau and is
/// entirely marked.
pub fn regional_minima(b: &Band, levels: usize) -> Result<BinaryMask> {
    if levels < 2 {
        return Err(Error::InvalidParameter("quantization levels must be at least 2"));
    }
    let (w, h) = (b.width(), b.height());
    let q = quantize(b, levels);
    let mut visited = vec![false; w * h];
    let mut marked = vec![false; w * h];
    let mut plateau = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if visited[start] {
            continue;
        }
        let level = q[start];
        let mut is_min = true;
        plateau.clear();
        stack.push(start);
        visited[start] = true;
        while let Some(i) = stack.pop() {
            plateau.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in &MOORE {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if q[j] < level {
                    is_min = false;
                } else if q[j] == level && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
        if is_min {
            for &i in &plateau {
                marked[i] = true;
            }
        }
    }
    BinaryMask::new(w, h, marked)
}
