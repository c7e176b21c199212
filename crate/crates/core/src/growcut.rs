//! The GrowCut cellular automaton.
//!
//! Every pixel is a cell holding a label, a strength in `[0, 1]` and a feature
//! vector. In each generation a neighbor `q` attacks cell `p` with force
//! `g(‖C_p − C_q‖) · θ_q` where `g(x) = 1 − x / c̄`; the strongest attack that
//! strictly exceeds `θ_p` wins and `p` takes the attacker's label with the
//! attack force as its new strength. Seeds start at strength 1 and therefore
//! never change; all other cells start unlabeled at strength 0.
//!
//! Updates are synchronous: generation `t + 1` reads only generation `t`.
//! Two engines compute the same generations:
//!
//! * [`Engine::Synchronous`] evaluates every cell.
//! * [`Engine::ActiveSet`] evaluates only cells next to a cell that changed in
//!   the previous generation. A cell none of whose neighbors changed sees the
//!   same attacks as before, and it already holds the best of them, so it
//!   cannot change.

use alloc::vec;
use alloc::vec::Vec;

use crate::morphology::MOORE;
use crate::par::fill_rows;
use crate::raster::{Band, LabelRaster, MultiBandRaster};
use crate::seeding::{scale_ndvi, SeedSet};
use crate::{Error, Result};

/// Attack damping `1 − x / c̄`, clamped at 0 past `c̄`.
#[inline]
pub fn g(x: f64, c_bar: f64) -> f64 {
    debug_assert!(c_bar > 0.0);
    debug_assert!(x <= c_bar * (1.0 + 1e-12), "distance {x} exceeds c_bar {c_bar}");
    (1.0 - x / c_bar).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Neighborhood {
    #[default]
    Moore8,
    VonNeumann4,
}

const VON_NEUMANN: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

impl Neighborhood {
    /// Offsets in row-major order. The list is point-symmetric:
    /// `offsets[len - 1 - k] == -offsets[k]`.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Neighborhood::Moore8 => &MOORE,
            Neighborhood::VonNeumann4 => &VON_NEUMANN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowCutParams {
    pub max_iterations: usize,
    pub neighborhood: Neighborhood,
}

impl GrowCutParams {
    /// Moore neighborhood, at most `width + height` generations.
    pub fn for_size(width: usize, height: usize) -> Self {
        Self {
            max_iterations: width + height,
            neighborhood: Neighborhood::Moore8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    Synchronous,
    #[default]
    ActiveSet,
}

/// Pixel-interleaved feature vectors (the `C_p` of every cell).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    width: usize,
    height: usize,
    dims: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(width: usize, height: usize, dims: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || dims == 0 {
            return Err(Error::EmptyDimensions);
        }
        if data.len() != width * height * dims {
            return Err(Error::Size {
                expected: width * height * dims,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            dims,
            data,
        })
    }

    /// Features straight from the bands of `r`.
    pub fn from_raster(r: &MultiBandRaster) -> Self {
        Self::assemble(r, None)
    }

    /// Normalized bands followed by NDVI mapped to `[0, 1]`.
    pub fn with_ndvi(normalized: &MultiBandRaster, ndvi: &Band) -> Result<Self> {
        if (ndvi.width(), ndvi.height()) != (normalized.width(), normalized.height()) {
            return Err(Error::Size {
                expected: normalized.pixels(),
                actual: ndvi.len(),
            });
        }
        Ok(Self::assemble(normalized, Some(ndvi)))
    }

    fn assemble(r: &MultiBandRaster, ndvi: Option<&Band>) -> Self {
        let dims = r.bands() + usize::from(ndvi.is_some());
        let n = r.pixels();
        let mut data = Vec::with_capacity(n * dims);
        for i in 0..n {
            for b in 0..r.bands() {
                data.push(r.band_slice(b)[i]);
            }
            if let Some(v) = ndvi {
                data.push(scale_ndvi(v.as_slice()[i]));
            }
        }
        Self {
            width: r.width(),
            height: r.height(),
            dims,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn feature(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }
}

/// Euclidean distance between two feature vectors.
#[inline]
pub fn feature_distance(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::sqrt(sum)
}

/// Label and strength of one cell. `label == 0` means unlabeled, otherwise
/// the cell carries cluster `label - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cell {
    pub label: u16,
    pub strength: f64,
}

impl Cell {
    #[inline]
    fn differs(&self, other: &Cell) -> bool {
        self.label != other.label || self.strength.to_bits() != other.strength.to_bits()
    }
}

/// The automaton: cells, neighborhood and the damping scale `c̄`.
#[derive(Debug, Clone)]
pub struct AutomatonState {
    width: usize,
    height: usize,
    neighborhood: Neighborhood,
    c_bar: f64,
    cells: Vec<Cell>,
    // Scratch buffer for the synchronous engine.
    next: Vec<Cell>,
    // g(‖C_p − C_q‖) for the forward half of the offsets (index >= len / 2),
    // `half` entries per cell; 0 where q is off the grid.
    weights: Vec<f64>,
    half: usize,
    iteration: usize,
    changed_last_step: usize,
    // Cells that changed in the last generation; `None` before the first one.
    changed: Option<Vec<u32>>,
    stamp: Vec<u32>,
    stamp_gen: u32,
    visited: u64,
}

impl AutomatonState {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn c_bar(&self) -> f64 {
        self.c_bar
    }

    pub fn neighborhood(&self) -> Neighborhood {
        self.neighborhood
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Generations that changed at least one cell.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn changed_last_step(&self) -> usize {
        self.changed_last_step
    }

    /// Total cell evaluations performed so far.
    pub fn visited(&self) -> u64 {
        self.visited
    }

    #[inline]
    fn neighbor(&self, p: usize, off: (isize, isize)) -> Option<usize> {
        let x = (p % self.width) as isize + off.0;
        let y = (p / self.width) as isize + off.1;
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            None
        } else {
            Some(y as usize * self.width + x as usize)
        }
    }

    /// `g(‖C_p − C_q‖)` for `q = p + offsets[k]`, which must be on the grid.
    #[inline]
    pub fn affinity(&self, p: usize, q: usize, k: usize) -> f64 {
        let len = self.half * 2;
        if k >= self.half {
            self.weights[p * self.half + (k - self.half)]
        } else {
            self.weights[q * self.half + (len - 1 - k - self.half)]
        }
    }

    #[inline]
    fn evolve(&self, p: usize) -> Cell {
        let mut best = self.cells[p];
        let offsets = self.neighborhood.offsets();
        for (k, &off) in offsets.iter().enumerate() {
            let Some(q) = self.neighbor(p, off) else {
                continue;
            };
            let attack = self.affinity(p, q, k) * self.cells[q].strength;
            if attack > best.strength {
                best = Cell {
                    label: self.cells[q].label,
                    strength: attack,
                };
            }
        }
        best
    }

    /// One generation evaluating every cell. Returns the number of changed
    /// cells.
    pub fn step_synchronous(&mut self) -> usize {
        let mut next = core::mem::take(&mut self.next);
        next.resize(self.cells.len(), Cell::default());
        let w = self.width;
        {
            let this = &*self;
            fill_rows(&mut next, w, |y, row| {
                for (x, dst) in row.iter_mut().enumerate() {
                    *dst = this.evolve(y * w + x);
                }
            });
        }
        let changed: Vec<u32> = (0..self.cells.len())
            .filter(|&i| next[i].differs(&self.cells[i]))
            .map(|i| i as u32)
            .collect();
        self.next = core::mem::replace(&mut self.cells, next);
        self.visited += self.cells.len() as u64;
        self.finish_step(changed)
    }

    /// One generation evaluating only cells adjacent to last generation's
    /// changes. Produces exactly the state [`step_synchronous`] would.
    ///
    /// [`step_synchronous`]: AutomatonState::step_synchronous
    pub fn step_active_set(&mut self) -> usize {
        let candidates = self.active_candidates();
        self.visited += candidates.len() as u64;
        let updates = self.evaluate(&candidates);
        for &(p, cell) in &updates {
            self.cells[p as usize] = cell;
        }
        self.finish_step(updates.into_iter().map(|(p, _)| p).collect())
    }

    pub fn step(&mut self, engine: Engine) -> usize {
        match engine {
            Engine::Synchronous => self.step_synchronous(),
            Engine::ActiveSet => self.step_active_set(),
        }
    }

    fn finish_step(&mut self, changed: Vec<u32>) -> usize {
        let n = changed.len();
        self.changed_last_step = n;
        if n > 0 {
            self.iteration += 1;
        }
        self.changed = Some(changed);
        n
    }

    /// Cells whose next state could differ from the current one.
    fn active_candidates(&mut self) -> Vec<u32> {
        self.stamp_gen = self.stamp_gen.wrapping_add(1);
        if self.stamp_gen == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.stamp_gen = 1;
        }
        let gen = self.stamp_gen;
        let sources: Vec<u32> = match &self.changed {
            Some(c) => c.clone(),
            // No history yet: any cell with a non-zero neighbor may be attacked.
            None => (0..self.cells.len() as u32)
                .filter(|&i| self.cells[i as usize].strength > 0.0)
                .collect(),
        };
        let mut out = Vec::new();
        // The offset list is symmetric, so the cells that see `c` as a
        // neighbor are exactly `c + offset`.
        for &c in &sources {
            for &off in self.neighborhood.offsets() {
                if let Some(p) = self.neighbor(c as usize, off) {
                    if self.stamp[p] != gen {
                        self.stamp[p] = gen;
                        out.push(p as u32);
                    }
                }
            }
        }
        out
    }

    fn evaluate(&self, candidates: &[u32]) -> Vec<(u32, Cell)> {
        let check = |&p: &u32| {
            let cell = self.evolve(p as usize);
            cell.differs(&self.cells[p as usize]).then_some((p, cell))
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            candidates.par_iter().filter_map(check).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            candidates.iter().filter_map(check).collect()
        }
    }

    /// True when no cell would change in the next generation.
    pub fn is_stable(&mut self) -> bool {
        let candidates = self.active_candidates();
        self.evaluate(&candidates).is_empty()
    }

    pub fn labels(&self) -> LabelRaster {
        LabelRaster::new(
            self.width,
            self.height,
            self.cells.iter().map(|c| c.label).collect(),
        )
        .expect("state dimensions are valid")
    }

    pub fn strengths(&self) -> Band {
        Band::new(
            self.width,
            self.height,
            self.cells.iter().map(|c| c.strength).collect(),
        )
        .expect("strengths are finite")
    }
}

/// Builds the initial automaton: labeled seed pixels get `(cluster + 1, 1.0)`,
/// every other cell `(0, 0.0)`.
///
/// `c̄` is the largest feature norm in the image, raised if needed to the
/// largest distance between neighboring cells so `g` stays within `[0, 1]`;
/// an all-zero image uses `c̄ = 1`.
pub fn init_automaton(
    features: &FeatureGrid,
    seeds: &SeedSet,
    neighborhood: Neighborhood,
) -> Result<AutomatonState> {
    let (w, h) = (features.width(), features.height());
    if (seeds.width, seeds.height) != (w, h) {
        return Err(Error::Size {
            expected: w * h,
            actual: seeds.width * seeds.height,
        });
    }
    if features.data.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter("features must be non-negative"));
    }
    let n = w * h;
    let mut cells = vec![Cell::default(); n];
    let mut any = false;
    for region in &seeds.regions {
        let Some(label) = region.cluster_label else {
            continue;
        };
        if label == u16::MAX {
            return Err(Error::InvalidParameter("cluster label too large"));
        }
        for &(x, y) in &region.pixels {
            if x >= w || y >= h {
                return Err(Error::InvalidParameter("seed pixel outside the raster"));
            }
            cells[y * w + x] = Cell {
                label: label + 1,
                strength: 1.0,
            };
            any = true;
        }
    }
    if !any {
        return Err(Error::EmptySeeds);
    }

    let offsets = neighborhood.offsets();
    let half = offsets.len() / 2;
    let mut distances = vec![0.0; n * half];
    let mut max_dist: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for p in 0..n {
        let cp = features.feature(p);
        max_norm = max_norm.max(libm::sqrt(cp.iter().map(|v| v * v).sum()));
        let (x, y) = ((p % w) as isize, (p / w) as isize);
        for (f, &(dx, dy)) in offsets[half..].iter().enumerate() {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                distances[p * half + f] = f64::NAN;
                continue;
            }
            let d = feature_distance(cp, features.feature(ny as usize * w + nx as usize));
            max_dist = max_dist.max(d);
            distances[p * half + f] = d;
        }
    }
    let mut c_bar = max_norm.max(max_dist);
    if c_bar == 0.0 {
        c_bar = 1.0;
    }
    let weights = distances
        .into_iter()
        .map(|d| if d.is_nan() { 0.0 } else { g(d, c_bar) })
        .collect();

    Ok(AutomatonState {
        width: w,
        height: h,
        neighborhood,
        c_bar,
        next: Vec::new(),
        weights,
        half,
        iteration: 0,
        changed_last_step: 0,
        changed: None,
        stamp: vec![0; n],
        stamp_gen: 0,
        visited: 0,
        cells,
    })
}

/// Final state of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowCutOutcome {
    pub labels: LabelRaster,
    pub strengths: Band,
    /// Generations that changed at least one cell.
    pub iterations: usize,
    pub converged: bool,
    /// Cells still unlabeled at the end.
    pub unlabeled: usize,
    /// Changed-cell count of every generation that changed something.
    pub changed_per_generation: Vec<usize>,
    /// Total cell evaluations.
    pub visited_cells: u64,
}

/// Evolves until a generation changes nothing or `max_iterations`
/// generations have changed cells, whichever comes first.
pub fn run(state: &mut AutomatonState, params: &GrowCutParams, engine: Engine) -> GrowCutOutcome {
    let mut history = Vec::new();
    let mut converged = false;
    while state.iteration() < params.max_iterations {
        let changed = state.step(engine);
        if changed == 0 {
            converged = true;
            break;
        }
        history.push(changed);
    }
    if !converged {
        converged = state.is_stable();
    }
    let labels = state.labels();
    let unlabeled = labels
        .as_slice()
        .iter()
        .filter(|&&l| l == LabelRaster::UNLABELED)
        .count();
    GrowCutOutcome {
        strengths: state.strengths(),
        labels,
        iterations: state.iteration(),
        converged,
        unlabeled,
        changed_per_generation: history,
        visited_cells: state.visited(),
    }
}

/// [`init_automaton`] followed by [`run`].
pub fn segment(
    features: &FeatureGrid,
    seeds: &SeedSet,
    params: &GrowCutParams,
    engine: Engine,
) -> Result<GrowCutOutcome> {
    if params.max_iterations == 0 {
        return Err(Error::InvalidParameter("max_iterations must be at least 1"));
    }
    let mut state = init_automaton(features, seeds, params.neighborhood)?;
    Ok(run(&mut state, params, engine))
}
