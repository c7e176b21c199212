//! Seed regions: connected components of the minima mask, size pruning and
//! spectral descriptors (per-band mode plus mean NDVI).

use alloc::vec;
use alloc::vec::Vec;

use crate::morphology::{BinaryMask, MOORE};
use crate::raster::{scale_unit, Band, MultiBandRaster};
use crate::{Error, Result};

/// Number of histogram bins used for the per-band mode.
pub const MODE_BINS: usize = 256;

/// One connected group of seed pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRegion {
    /// 1-based, dense within its [`SeedSet`].
    pub id: u32,
    /// `(x, y)` in row-major order.
    pub pixels: Vec<(usize, usize)>,
    /// Per-band mode of the raw values followed by the mean NDVI. Empty until
    /// [`describe_seeds`] runs.
    pub descriptor: Vec<f64>,
    pub cluster_label: Option<u16>,
}

impl SeedRegion {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSet {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<SeedRegion>,
}

impl SeedSet {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Rasterizes region membership (true where any region has a pixel).
    pub fn mask(&self) -> BinaryMask {
        let mut data = vec![false; self.width * self.height];
        for r in &self.regions {
            for &(x, y) in &r.pixels {
                data[y * self.width + x] = true;
            }
        }
        BinaryMask::new(self.width, self.height, data).expect("seed set dimensions are positive")
    }
}

/// Maximal 8-connected components of the set pixels. Ids follow the raster
/// order of each component's first pixel.
pub fn connected_components(m: &BinaryMask) -> SeedSet {
    let (w, h) = (m.width(), m.height());
    let src = m.as_slice();
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !src[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in &MOORE {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if src[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        regions.push(SeedRegion {
            id: regions.len() as u32 + 1,
            pixels: members.into_iter().map(|i| (i % w, i / w)).collect(),
            descriptor: Vec::new(),
            cluster_label: None,
        });
    }
    SeedSet {
        width: w,
        height: h,
        regions,
    }
}

/// Drops regions with fewer than `min_seed_size` pixels and renumbers the
/// survivors `1..=n` in their original order.
pub fn prune_small(s: SeedSet, min_seed_size: usize) -> Result<SeedSet> {
    if min_seed_size == 0 {
        return Err(Error::InvalidParameter("min_seed_size must be at least 1"));
    }
    let regions: Vec<SeedRegion> = s
        .regions
        .into_iter()
        .filter(|r| r.len() >= min_seed_size)
        .enumerate()
        .map(|(i, mut r)| {
            r.id = i as u32 + 1;
            r
        })
        .collect();
    if regions.is_empty() {
        return Err(Error::EmptySeeds);
    }
    Ok(SeedSet {
        width: s.width,
        height: s.height,
        regions,
    })
}

/// `(NIR − Red) / (NIR + Red)` per pixel, `0` where the sum is zero.
pub fn ndvi(r: &MultiBandRaster, red_band: usize, nir_band: usize) -> Result<Band> {
    r.check_band(red_band)?;
    r.check_band(nir_band)?;
    if red_band == nir_band {
        return Err(Error::SameBand(red_band));
    }
    let data = r
        .band_slice(red_band)
        .iter()
        .zip(r.band_slice(nir_band))
        .map(|(&red, &nir)| {
            let sum = nir + red;
            if sum == 0.0 {
                0.0
            } else {
                (nir - red) / sum
            }
        })
        .collect();
    Band::new(r.width(), r.height(), data)
}

/// Center of the most populated of [`MODE_BINS`] equal-width bins spanning
/// `range`. Ties go to the lowest bin; a degenerate range yields its minimum.
pub fn binned_mode(values: impl IntoIterator<Item = f64>, range: (f64, f64)) -> f64 {
    let (lo, hi) = range;
    let span = hi - lo;
    if span <= 0.0 {
        return lo;
    }
    let mut hist = [0u32; MODE_BINS];
    for v in values {
        hist[mode_bin(v, lo, span)] += 1;
    }
    let mut best = 0;
    for (i, &c) in hist.iter().enumerate() {
        if c > hist[best] {
            best = i;
        }
    }
    lo + (best as f64 + 0.5) * span / MODE_BINS as f64
}

#[inline]
fn mode_bin(v: f64, lo: f64, span: f64) -> usize {
    let top = (MODE_BINS - 1) as f64;
    libm::floor((v - lo) / span * MODE_BINS as f64).clamp(0.0, top) as usize
}

/// Descriptor of one region: per-band binned mode of the raw values (bins
/// over each band's global range, `ranges[b]`), then the mean NDVI.
pub fn seed_descriptor(
    r: &MultiBandRaster,
    ranges: &[(f64, f64)],
    region: &SeedRegion,
    ndvi_band: &Band,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(r.bands() + 1);
    for (b, &range) in ranges.iter().enumerate().take(r.bands()) {
        out.push(binned_mode(
            region.pixels.iter().map(|&(x, y)| r.get(x, y, b)),
            range,
        ));
    }
    // Sum in raster order so the mean does not depend on pixel-list order.
    let mut idx: Vec<usize> = region.pixels.iter().map(|&(x, y)| y * r.width() + x).collect();
    idx.sort_unstable();
    let sum: f64 = idx.iter().map(|&i| ndvi_band.as_slice()[i]).sum();
    out.push(sum / region.len().max(1) as f64);
    out
}

/// Fills in every region's descriptor from the raw raster.
pub fn describe_seeds(
    r: &MultiBandRaster,
    mut seeds: SeedSet,
    red_band: usize,
    nir_band: usize,
) -> Result<SeedSet> {
    let vi = ndvi(r, red_band, nir_band)?;
    let ranges = r.band_ranges();
    for region in &mut seeds.regions {
        region.descriptor = seed_descriptor(r, &ranges, region, &vi);
    }
    Ok(seeds)
}

/// Puts a descriptor on the unit cube for clustering: spectral components are
/// min-max scaled with the band's global range, NDVI maps `[-1, 1] → [0, 1]`.
pub fn scale_descriptor(descriptor: &[f64], ranges: &[(f64, f64)]) -> Vec<f64> {
    let bands = ranges.len();
    let mut out: Vec<f64> = descriptor[..bands]
        .iter()
        .zip(ranges)
        .map(|(&v, &(lo, hi))| {
            let span = hi - lo;
            if span > 0.0 {
                scale_unit(v, lo, span)
            } else {
                0.0
            }
        })
        .collect();
    out.push(scale_ndvi(descriptor[bands]));
    out
}

#[inline]
pub fn scale_ndvi(v: f64) -> f64 {
    ((v + 1.0) * 0.5).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(w: usize, h: usize, on: &[(usize, usize)]) -> BinaryMask {
        let mut d = vec![false; w * h];
        for &(x, y) in on {
            d[y * w + x] = true;
        }
        BinaryMask::new(w, h, d).unwrap()
    }

    fn sized(sizes: &[usize]) -> SeedSet {
        let regions = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| SeedRegion {
                id: i as u32 + 1,
                pixels: (0..n).map(|x| (x, i)).collect(),
                descriptor: Vec::new(),
                cluster_label: None,
            })
            .collect();
        SeedSet {
            width: 16,
            height: sizes.len(),
            regions,
        }
    }

    #[test]
    fn diagonal_pixels_join() {
        let s = connected_components(&mask(3, 3, &[(0, 0), (1, 1)]));
        assert_eq!(s.len(), 1);
        assert_eq!(s.regions[0].pixels, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&mask(4, 4, &[])).is_empty());
    }

    #[test]
    fn ids_follow_raster_order() {
        let s = connected_components(&mask(5, 3, &[(4, 0), (0, 2), (2, 2)]));
        let firsts: Vec<_> = s.regions.iter().map(|r| (r.id, r.pixels[0])).collect();
        assert_eq!(firsts, vec![(1, (4, 0)), (2, (0, 2)), (3, (2, 2))]);
    }

    #[test]
    fn prune_threshold_and_boundary() {
        let p = prune_small(sized(&[1, 3, 9]), 4).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!((p.regions[0].id, p.regions[0].len()), (1, 9));
        assert_eq!(prune_small(sized(&[1, 3, 9]), 1).unwrap(), sized(&[1, 3, 9]));
        assert_eq!(prune_small(sized(&[4, 4]), 4).unwrap().len(), 2);
        assert_eq!(prune_small(sized(&[1, 2]), 3), Err(Error::EmptySeeds));
    }

    #[test]
    fn ndvi_formula() {
        let r = MultiBandRaster::new(3, 1, 2, vec![100.0, 50.0, 0.0, 100.0, 150.0, 0.0]).unwrap();
        let v = ndvi(&r, 0, 1).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 0.5, 0.0]);
        assert_eq!(ndvi(&r, 1, 1), Err(Error::SameBand(1)));
        assert!(ndvi(&r, 0, 2).is_err());
    }

    #[test]
    fn mode_majority_singleton_and_ties() {
        let range = (0.0, 255.0);
        let center = |v: f64| {
            let w = 255.0 / 256.0;
            (libm::floor(v / w) + 0.5) * w
        };
        assert_eq!(binned_mode([5.0, 5.0, 9.0], range), center(5.0));
        assert_eq!(binned_mode([9.0], range), center(9.0));
        assert_eq!(binned_mode([2.0, 2.0, 8.0, 8.0], range), center(2.0));
        assert_eq!(binned_mode([3.0, 3.0], (3.0, 3.0)), 3.0);
    }

    #[test]
    fn descriptor_has_mode_then_mean_ndvi() {
        // red = band 0, nir = band 1
        let r = MultiBandRaster::new(2, 1, 2, vec![50.0, 100.0, 150.0, 100.0]).unwrap();
        let s = connected_components(&mask(2, 1, &[(0, 0), (1, 0)]));
        let d = describe_seeds(&r, s, 0, 1).unwrap();
        let desc = &d.regions[0].descriptor;
        assert_eq!(desc.len(), 3);
        assert_eq!(desc[2], 0.25);
        let scaled = scale_descriptor(desc, &r.band_ranges());
        assert_eq!(scaled[1], 0.5 / 256.0);
        assert_eq!(scaled[2], 0.625);
    }
}
