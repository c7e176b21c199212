//! Seed labeling with k-means.
//!
//! Lloyd iterations start from `k` distinct descriptors drawn without
//! replacement. [`best_of_restarts`] repeats this on independent PRNG
//! substreams and keeps the run whose closest pair of centroids is farthest
//! apart.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::seeding::SeedSet;
use crate::{Error, Result};

/// xoshiro256** seeded through splitmix64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prng {
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s }
    }

    /// An independent generator for stream `index` under `seed`.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut sm = index ^ 0xD1B5_4A32_D192_ED03;
        Self::new(seed ^ splitmix64(&mut sm))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `0..n` (unbiased, by rejection). `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index of every descriptor.
    pub assignment: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    /// Minimum pairwise centroid distance; `+∞` for a single cluster.
    pub separation: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after the initial assignment and after every Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

impl KMeansResult {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dims(descriptors: &[Vec<f64>]) -> Result<usize> {
    let first = descriptors.first().ok_or(Error::EmptyInput)?;
    let dim = first.len();
    for d in descriptors {
        if d.len() != dim {
            return Err(Error::DescriptorLength {
                expected: dim,
                actual: d.len(),
            });
        }
    }
    Ok(dim)
}

fn canonical_bits(v: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same point.
    v.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x + 0.0).total_cmp(&(y + 0.0)))
        .find(|o| o.is_ne())
        .unwrap_or(core::cmp::Ordering::Equal)
}

/// Indices of the first occurrence of every distinct descriptor.
pub fn distinct_indices(descriptors: &[Vec<f64>]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    descriptors
        .iter()
        .enumerate()
        .filter(|(_, d)| seen.insert(canonical_bits(d)))
        .map(|(i, _)| i)
        .collect()
}

/// Nearest centroid per descriptor (ties to the lowest index) and the
/// resulting inertia.
pub fn assign(descriptors: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let assignment = descriptors
        .iter()
        .map(|d| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centroids.iter().enumerate() {
                let dist = squared_distance(d, c);
                if dist < best_d {
                    best_d = dist;
                    best = j;
                }
            }
            inertia += best_d;
            best
        })
        .collect();
    (assignment, inertia)
}

/// Minimum Euclidean distance between any two centroids.
pub fn separation(centroids: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            best = best.min(libm::sqrt(squared_distance(&centroids[i], &centroids[j])));
        }
    }
    best
}

// Cluster means; an empty cluster is moved onto the descriptor farthest from
// its own centroid (each descriptor used at most once per update, equal
// distances resolved by descriptor value).
fn update(descriptors: &[Vec<f64>], assignment: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (d, &a) in descriptors.iter().zip(assignment) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(d) {
            *s += v;
        }
    }
    let mut centroids: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &n)| {
            if n == 0 {
                s
            } else {
                s.into_iter().map(|v| v / n as f64).collect()
            }
        })
        .collect();
    if counts.contains(&0) {
        let mut taken = vec![false; descriptors.len()];
        for j in 0..k {
            if counts[j] != 0 {
                continue;
            }
            let mut far: Option<usize> = None;
            let mut far_d = f64::NEG_INFINITY;
            for (i, (d, &a)) in descriptors.iter().zip(assignment).enumerate() {
                if taken[i] || counts[a] == 0 {
                    continue;
                }
                let dist = squared_distance(d, &centroids[a]);
                let farther = dist > far_d
                    || (dist == far_d && far.is_some_and(|f: usize| lex_cmp(d, &descriptors[f]).is_lt()));
                if farther {
                    far_d = dist;
                    far = Some(i);
                }
            }
            if let Some(i) = far {
                taken[i] = true;
                centroids[j] = descriptors[i].clone();
            }
        }
    }
    centroids
}

/// Lloyd iterations from explicit starting centroids.
pub fn kmeans_from(
    descriptors: &[Vec<f64>],
    init: Vec<Vec<f64>>,
    max_iter: usize,
) -> Result<KMeansResult> {
    let dim = check_dims(descriptors)?;
    if init.is_empty() {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    if let Some(c) = init.iter().find(|c| c.len() != dim) {
        return Err(Error::DescriptorLength {
            expected: dim,
            actual: c.len(),
        });
    }
    let k = init.len();
    let mut centroids = init;
    let (mut assignment, mut inertia) = assign(descriptors, &centroids);
    let mut history = vec![inertia];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        centroids = update(descriptors, &assignment, k, dim);
        let (next, next_inertia) = assign(descriptors, &centroids);
        inertia = next_inertia;
        history.push(inertia);
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
    }
    Ok(KMeansResult {
        separation: separation(&centroids),
        centroids,
        assignment,
        inertia,
        iterations,
        converged,
        inertia_history: history,
    })
}

/// One k-means run. `k` is lowered to the number of distinct descriptors when
/// larger; compare [`KMeansResult::k`] with the request to detect that.
pub fn kmeans(
    descriptors: &[Vec<f64>],
    k: usize,
    prng: &mut Prng,
    max_iter: usize,
) -> Result<KMeansResult> {
    check_dims(descriptors)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1"));
    }
    // Sampling from the distinct descriptors in value order makes the initial
    // centroids independent of the input order.
    let mut pool = distinct_indices(descriptors);
    pool.sort_by(|&a, &b| lex_cmp(&descriptors[a], &descriptors[b]));
    let k = k.min(pool.len());
    // Partial Fisher-Yates: the first k slots become the sample.
    for i in 0..k {
        let j = i + prng.below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    let init = pool[..k].iter().map(|&i| descriptors[i].clone()).collect();
    kmeans_from(descriptors, init, max_iter)
}

/// Whether `a` is preferred over `b`: larger separation, then lower inertia.
/// Equal candidates keep the earlier run.
fn better(a: &KMeansResult, b: &KMeansResult) -> bool {
    a.separation > b.separation || (a.separation == b.separation && a.inertia < b.inertia)
}

/// All restart results, run `r` drawing from `Prng::substream(seed, r)`.
pub fn restart_runs(
    descriptors: &[Vec<f64>],
    k: usize,
    restarts: usize,
    seed: u64,
    max_iter: usize,
) -> Result<Vec<KMeansResult>> {
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1"));
    }
    let run = |r: usize| kmeans(descriptors, k, &mut Prng::substream(seed, r as u64), max_iter);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..restarts).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..restarts).map(run).collect()
    }
}

/// Runs k-means `restarts` times and keeps the result with the largest
/// minimum centroid gap (ties: lower inertia, then the earlier run).
pub fn best_of_restarts(
    descriptors: &[Vec<f64>],
    k: usize,
    restarts: usize,
    seed: u64,
    max_iter: usize,
) -> Result<KMeansResult> {
    let runs = restart_runs(descriptors, k, restarts, seed, max_iter)?;
    let mut best: Option<KMeansResult> = None;
    for r in runs {
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Copies each region's cluster index into `cluster_label`.
pub fn apply_labels(mut s: SeedSet, result: &KMeansResult) -> Result<SeedSet> {
    if result.assignment.len() != s.regions.len() {
        return Err(Error::Size {
            expected: s.regions.len(),
            actual: result.assignment.len(),
        });
    }
    if result.k() > u16::MAX as usize - 1 {
        return Err(Error::InvalidParameter("too many clusters for 16-bit labels"));
    }
    for (region, &a) in s.regions.iter_mut().zip(&result.assignment) {
        region.cluster_label = Some(a as u16);
    }
    Ok(s)
}
