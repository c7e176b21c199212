//! Polygons and contour overlays from a label raster.
//!
//! Every 4-connected region of equal label becomes one polygon: an outer ring
//! plus one ring per hole, running along pixel edges. Vertices are pixel
//! corners, so pixel `(x, y)` spans `(x, y)..(x + 1, y + 1)`. With `y` taken
//! as pointing up, outer rings are counter-clockwise (positive shoelace
//! area) and holes clockwise.

use alloc::vec;
use alloc::vec::Vec;

use crate::morphology::BinaryMask;
use crate::raster::{LabelRaster, MultiBandRaster};
use crate::{Error, Result};

pub type Vertex = (i64, i64);

/// A closed ring; the first vertex is repeated at the end.
pub type Ring = Vec<Vertex>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygon {
    pub label: u16,
    pub ring: Ring,
    pub holes: Vec<Ring>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolygonSet {
    pub polygons: Vec<Polygon>,
}

/// Twice the signed shoelace area of a closed ring.
pub fn signed_area2(ring: &[Vertex]) -> i64 {
    ring.windows(2)
        .map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1)
        .sum()
}

/// Length of a closed axis-aligned ring.
pub fn perimeter(ring: &[Vertex]) -> i64 {
    ring.windows(2)
        .map(|w| (w[1].0 - w[0].0).abs() + (w[1].1 - w[0].1).abs())
        .sum()
}

/// 4-connected regions of equal label: region index per pixel (raster order
/// of first pixel) and the region count.
pub fn label_regions(labels: &LabelRaster) -> (Vec<u32>, usize) {
    let (w, h) = (labels.width(), labels.height());
    let src = labels.as_slice();
    let mut region = vec![u32::MAX; w * h];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if region[start] != u32::MAX {
            continue;
        }
        region[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if region[j] == u32::MAX && src[j] == src[i] {
                    region[j] = count;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        count += 1;
    }
    (region, count as usize)
}

type Edge = (Vertex, Vertex);

fn boundary_edges(region: &[u32], w: usize, h: usize, count: usize) -> Vec<Vec<Edge>> {
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); count];
    for y in 0..h {
        for x in 0..w {
            let r = region[y * w + x];
            let same = |nx: isize, ny: isize| {
                nx >= 0
                    && ny >= 0
                    && (nx as usize) < w
                    && (ny as usize) < h
                    && region[ny as usize * w + nx as usize] == r
            };
            let (xi, yi) = (x as isize, y as isize);
            let (x0, y0, x1, y1) = (x as i64, y as i64, x as i64 + 1, y as i64 + 1);
            let out = &mut edges[r as usize];
            // Counter-clockwise around the pixel: interior on the left.
            if !same(xi, yi - 1) {
                out.push(((x0, y0), (x1, y0)));
            }
            if !same(xi + 1, yi) {
                out.push(((x1, y0), (x1, y1)));
            }
            if !same(xi, yi + 1) {
                out.push(((x1, y1), (x0, y1)));
            }
            if !same(xi - 1, yi) {
                out.push(((x0, y1), (x0, y0)));
            }
        }
    }
    edges
}

// Chains directed edges into closed rings. Where two edges leave a vertex the
// left turn is taken, which keeps diagonal-only contacts apart.
fn chain_rings(mut edges: Vec<Edge>) -> Vec<Ring> {
    edges.sort_unstable();
    let mut used = vec![false; edges.len()];
    let outgoing = |v: Vertex| {
        let lo = edges.partition_point(|e| e.0 < v);
        let hi = edges.partition_point(|e| e.0 <= v);
        lo..hi
    };
    let mut rings = Vec::new();
    for first in 0..edges.len() {
        if used[first] {
            continue;
        }
        used[first] = true;
        let start = edges[first].0;
        let mut ring = vec![start];
        let (mut from, mut at) = edges[first];
        while at != start {
            ring.push(at);
            let dir = (at.0 - from.0, at.1 - from.1);
            let prefs = [(-dir.1, dir.0), dir, (dir.1, -dir.0)];
            let range = outgoing(at);
            let next = prefs
                .iter()
                .find_map(|&d| {
                    range.clone().find(|&i| {
                        !used[i] && (edges[i].1 .0 - at.0, edges[i].1 .1 - at.1) == d
                    })
                })
                .expect("boundary edges form closed loops");
            used[next] = true;
            from = at;
            at = edges[next].1;
        }
        ring.push(start);
        rings.push(simplify(ring));
    }
    rings
}

// Drops vertices in the middle of straight runs. The first vertex is the
// lexicographically smallest corner and is always kept.
fn simplify(ring: Ring) -> Ring {
    let n = ring.len() - 1;
    let mut out = Vec::with_capacity(ring.len());
    for i in 0..n {
        let prev = ring[(i + n - 1) % n];
        let cur = ring[i];
        let next = ring[i + 1];
        let a = (cur.0 - prev.0, cur.1 - prev.1);
        let b = (next.0 - cur.0, next.1 - cur.1);
        if a.0 * b.1 - a.1 * b.0 != 0 {
            out.push(cur);
        }
    }
    out.push(out[0]);
    out
}

/// Traces every 4-connected equal-label region into a polygon. Output is
/// sorted by label, then by the outer ring's first vertex.
pub fn trace_contours(labels: &LabelRaster) -> PolygonSet {
    let (w, h) = (labels.width(), labels.height());
    let (region, count) = label_regions(labels);
    let mut region_label = vec![0u16; count];
    for (i, &r) in region.iter().enumerate() {
        region_label[r as usize] = labels.as_slice()[i];
    }
    let per_region = boundary_edges(&region, w, h, count);
    let mut polygons: Vec<Polygon> = per_region
        .into_iter()
        .zip(region_label)
        .map(|(edges, label)| {
            let mut outer = None;
            let mut holes = Vec::new();
            for ring in chain_rings(edges) {
                if signed_area2(&ring) > 0 {
                    debug_assert!(outer.is_none(), "a 4-connected region has one outer ring");
                    outer = Some(ring);
                } else {
                    holes.push(ring);
                }
            }
            holes.sort_unstable();
            Polygon {
                label,
                ring: outer.expect("every region has an outer ring"),
                holes,
            }
        })
        .collect();
    polygons.sort_by(|a, b| (a.label, a.ring[0]).cmp(&(b.label, b.ring[0])));
    PolygonSet { polygons }
}

/// Pixels with a 4-neighbor of a different label.
pub fn boundary_mask(labels: &LabelRaster) -> BinaryMask {
    let (w, h) = (labels.width(), labels.height());
    let src = labels.as_slice();
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let l = src[i];
            (x > 0 && src[i - 1] != l)
                || (x + 1 < w && src[i + 1] != l)
                || (y > 0 && src[i - w] != l)
                || (y + 1 < h && src[i + w] != l)
        })
        .collect();
    BinaryMask::new(w, h, data).expect("label raster dimensions are positive")
}

/// Interleaved 8-bit RGB: the three bands min-max stretched to `0..=255`,
/// with segment boundaries painted `color`.
pub fn render_overlay(
    r: &MultiBandRaster,
    labels: &LabelRaster,
    bands: [usize; 3],
    color: [u8; 3],
) -> Result<Vec<u8>> {
    for b in bands {
        r.check_band(b)?;
    }
    if (r.width(), r.height()) != (labels.width(), labels.height()) {
        return Err(Error::Size {
            expected: r.pixels(),
            actual: labels.as_slice().len(),
        });
    }
    let ranges = r.band_ranges();
    let edges = boundary_mask(labels);
    let mut out = Vec::with_capacity(r.pixels() * 3);
    for i in 0..r.pixels() {
        if edges.as_slice()[i] {
            out.extend_from_slice(&color);
            continue;
        }
        for b in bands {
            let (lo, hi) = ranges[b];
            let v = r.band_slice(b)[i];
            let s = if hi > lo { (v - lo) / (hi - lo) * 255.0 } else { 0.0 };
            out.push(libm::round(s).clamp(0.0, 255.0) as u8);
        }
    }
    Ok(out)
}
