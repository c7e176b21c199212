//! Reference implementations written independently of the library, kept as
//! plain and slow as possible.
#![allow(dead_code)]

use std::collections::BTreeMap;

pub const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

pub const VN4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

fn at(w: usize, h: usize, x: usize, y: usize, d: (isize, isize)) -> Option<usize> {
    let nx = x as isize + d.0;
    let ny = y as isize + d.1;
    (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then(|| ny as usize * w + nx as usize)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// One automaton state: label per cell (0 = none) and strength.
#[derive(Debug, Clone, PartialEq)]
pub struct RefState {
    pub labels: Vec<u16>,
    pub strengths: Vec<f64>,
}

/// Brute-force GrowCut straight from the pseudocode:
///
/// ```text
/// for p in cells:
///     l(p, t+1) = l(p, t); θ(p, t+1) = θ(p, t)
///     for q in N(p):
///         if g(|C_p − C_q|) · θ(q, t) > θ(p, t+1):
///             l(p, t+1) = l(q, t); θ(p, t+1) = g(|C_p − C_q|) · θ(q, t)
/// ```
///
/// Comparing against the running best keeps the strongest attacker and, among
/// equal ones, the first in neighbor order. `g(x) = max(0, 1 − x / c̄)` with
/// `c̄` the larger of the largest feature norm and the largest neighbor
/// distance (1 when both are 0). Seeds are `(pixel index, label)` with labels
/// already 1-based. Returns every state from generation 0 until nothing
/// changes or `max_gen` generations have run.
pub fn growcut_reference(
    w: usize,
    h: usize,
    features: &[Vec<f64>],
    seeds: &[(usize, u16)],
    nbhd: &[(isize, isize)],
    max_gen: usize,
) -> Vec<RefState> {
    let n = w * h;
    let mut c_bar: f64 = 0.0;
    for p in 0..n {
        c_bar = c_bar.max(features[p].iter().map(|v| v * v).sum::<f64>().sqrt());
        for &d in nbhd {
            if let Some(q) = at(w, h, p % w, p / w, d) {
                c_bar = c_bar.max(dist(&features[p], &features[q]));
            }
        }
    }
    if c_bar == 0.0 {
        c_bar = 1.0;
    }
    let g = |x: f64| (1.0 - x / c_bar).max(0.0);

    let mut cur = RefState {
        labels: vec![0; n],
        strengths: vec![0.0; n],
    };
    for &(p, l) in seeds {
        cur.labels[p] = l;
        cur.strengths[p] = 1.0;
    }
    let mut history = vec![cur.clone()];
    for _ in 0..max_gen {
        let mut next = cur.clone();
        for p in 0..n {
            for &d in nbhd {
                let Some(q) = at(w, h, p % w, p / w, d) else {
                    continue;
                };
                let fa = g(dist(&features[p], &features[q])) * cur.strengths[q];
                if fa > next.strengths[p] {
                    next.labels[p] = cur.labels[q];
                    next.strengths[p] = fa;
                }
            }
        }
        if next == cur {
            break;
        }
        history.push(next.clone());
        cur = next;
    }
    history
}

/// Regional minima by exhaustive plateau enumeration: for every pixel, flood
/// its plateau from scratch and mark it when no plateau pixel has a lower
/// 8-neighbor. Values are first binned with
/// `min(floor((v − lo) / (hi − lo) · levels), levels − 1)`.
pub fn regional_minima_reference(w: usize, h: usize, values: &[f64], levels: usize) -> Vec<bool> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let q: Vec<i64> = values
        .iter()
        .map(|&v| {
            if hi > lo {
                (((v - lo) / (hi - lo) * levels as f64).floor() as i64).min(levels as i64 - 1)
            } else {
                0
            }
        })
        .collect();
    (0..w * h)
        .map(|start| {
            let mut seen = vec![false; w * h];
            let mut todo = vec![start];
            seen[start] = true;
            let mut minimum = true;
            while let Some(p) = todo.pop() {
                for &d in &MOORE {
                    if let Some(r) = at(w, h, p % w, p / w, d) {
                        if q[r] < q[p] {
                            minimum = false;
                        }
                        if q[r] == q[p] && !seen[r] {
                            seen[r] = true;
                            todo.push(r);
                        }
                    }
                }
            }
            minimum
        })
        .collect()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// 8-connected components of the true pixels by union-find; components are
/// ordered by their first pixel in raster order, pixels in raster order.
pub fn components_reference(w: usize, h: usize, mask: &[bool]) -> Vec<Vec<(usize, usize)>> {
    let mut parent: Vec<usize> = (0..w * h).collect();
    for p in 0..w * h {
        if !mask[p] {
            continue;
        }
        for &d in &MOORE {
            if let Some(q) = at(w, h, p % w, p / w, d) {
                if mask[q] {
                    let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (p, &on) in mask.iter().enumerate().take(w * h) {
        if on {
            let r = find(&mut parent, p);
            groups.entry(r).or_default().push((p % w, p / w));
        }
    }
    // Roots are the smallest index in each set, so key order is first-pixel
    // order.
    groups.into_values().collect()
}

/// Label, outer ring, holes.
pub type Shape = (u16, Vec<(i64, i64)>, Vec<Vec<(i64, i64)>>);

/// Flat erosion with replicated borders: minimum over the window.
pub fn erode_reference(w: usize, h: usize, values: &[f64], offsets: &[(isize, isize)]) -> Vec<f64> {
    window(w, h, values, offsets, f64::min, f64::INFINITY)
}

pub fn dilate_reference(w: usize, h: usize, values: &[f64], offsets: &[(isize, isize)]) -> Vec<f64> {
    window(w, h, values, offsets, f64::max, f64::NEG_INFINITY)
}

fn window(
    w: usize,
    h: usize,
    values: &[f64],
    offsets: &[(isize, isize)],
    pick: fn(f64, f64) -> f64,
    init: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = init;
            for &(dx, dy) in offsets {
                let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                acc = pick(acc, values[sy * w + sx]);
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Even-odd test of point `(px, py)` against a closed ring.
pub fn ring_contains(ring: &[(i64, i64)], px: f64, py: f64) -> bool {
    let mut inside = false;
    for e in ring.windows(2) {
        let (x0, y0) = (e[0].0 as f64, e[0].1 as f64);
        let (x1, y1) = (e[1].0 as f64, e[1].1 as f64);
        if (y0 > py) != (y1 > py) {
            let xc = x0 + (py - y0) / (y1 - y0) * (x1 - x0);
            if px < xc {
                inside = !inside;
            }
        }
    }
    inside
}

/// Paints each pixel center with the label of the polygon containing it
/// (inside the outer ring, outside every hole). Pixels claimed by no polygon
/// stay `None`; a pixel claimed twice is reported as an error.
pub fn rasterize_reference(
    w: usize,
    h: usize,
    polygons: &[Shape],
) -> Result<Vec<Option<u16>>, String> {
    let mut out = vec![None; w * h];
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            for (label, ring, holes) in polygons {
                if ring_contains(ring, px, py) && !holes.iter().any(|hole| ring_contains(hole, px, py)) {
                    if out[y * w + x].is_some() {
                        return Err(format!("pixel ({x}, {y}) covered twice"));
                    }
                    out[y * w + x] = Some(*label);
                }
            }
        }
    }
    Ok(out)
}

/// Lowest within-cluster sum of squares over every split of `values` into two
/// non-empty groups.
pub fn best_two_partition(values: &[f64]) -> (f64, Vec<bool>) {
    let n = values.len();
    assert!((2..=20).contains(&n));
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1..(1u32 << n) - 1 {
        let side: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let mut cost = 0.0;
        for group in [true, false] {
            let members: Vec<f64> = (0..n).filter(|&i| side[i] == group).map(|i| values[i]).collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            cost += members.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        }
        if cost < best.0 {
            best = (cost, side);
        }
    }
    best
}

/// Whether two labelings induce the same partition.
pub fn same_partition<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x
        })
}
