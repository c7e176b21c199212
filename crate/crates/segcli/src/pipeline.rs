//! Stage orchestration.
//!
//! The pipeline is five stages, each reading the previous stage's artifact:
//!
//! | stage       | reads                  | writes                              |
//! |-------------|------------------------|-------------------------------------|
//! | `gradient`  | input raster           | `gradient.hdr`, `gradient.f32`      |
//! | `seeds`     | gradient               | `seed_mask.pgm`, `seeds.json`       |
//! | `label`     | `seeds.json`           | `labeled_seeds.json`                |
//! | `segment`   | `labeled_seeds.json`   | `labels.pgm`                        |
//! | `vectorize` | `labels.pgm`           | `polygons.json`, `overlay.ppm`      |
//!
//! Every stage also reads the input raster. [`run_pipeline`] passes the
//! intermediates in memory and writes `manifest.json`; [`run_stage`] loads
//! them from the output directory. The gradient is stored as `f32` and both
//! paths continue from the `f32`-rounded values, so they agree bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use growseg_core::clustering::{apply_labels, best_of_restarts, KMeansResult};
use growseg_core::growcut::{self, FeatureGrid, GrowCutOutcome, GrowCutParams};
use growseg_core::morphology::{asf_raster, multiscale_gradient, regional_minima};
use growseg_core::raster::normalize_bands;
use growseg_core::seeding::{
    connected_components, describe_seeds, ndvi, prune_small, scale_descriptor, SeedSet,
};
use growseg_core::vectorize::{render_overlay, trace_contours, PolygonSet};
use growseg_core::{Band, LabelRaster, MultiBandRaster};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{EngineName, PipelineConfig};
use crate::error::{Error, Result};
use crate::format::{self, encode_label_pgm, encode_mask_pgm, encode_ppm, Dtype};
use crate::json;

pub const STAGES: [&str; 5] = ["gradient", "seeds", "label", "segment", "vectorize"];

pub const GRADIENT_HEADER: &str = "gradient.hdr";
pub const GRADIENT_DATA: &str = "gradient.f32";
pub const SEED_MASK: &str = "seed_mask.pgm";
pub const SEEDS: &str = "seeds.json";
pub const LABELED_SEEDS: &str = "labeled_seeds.json";
pub const LABELS: &str = "labels.pgm";
pub const POLYGONS: &str = "polygons.json";
pub const OVERLAY: &str = "overlay.ppm";
pub const MANIFEST: &str = "manifest.json";

fn stage_err(stage: &'static str) -> impl FnOnce(growseg_core::Error) -> Error {
    move |source| Error::Stage { stage, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub minima_pixels: usize,
    pub before_pruning: usize,
    pub after_pruning: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub k_requested: usize,
    pub k_used: usize,
    /// `None` for a single cluster (infinite separation).
    pub separation: Option<f64>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowCutReport {
    pub engine: EngineName,
    pub c_bar: f64,
    pub iterations: usize,
    pub converged: bool,
    pub unlabeled: usize,
    pub changed_per_generation: Vec<usize>,
    pub visited_cells: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub wall_ms: f64,
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    /// SHA-256 of the input header and data files.
    pub inputs: BTreeMap<String, String>,
    pub stages: Vec<StageTiming>,
    pub seeds: SeedReport,
    pub labeling: LabelReport,
    pub growcut: GrowCutReport,
    /// SHA-256 of every artifact written, by file name.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Multiscale gradient of the filtered, normalized raster, rounded to `f32`.
pub fn gradient_stage(cfg: &PipelineConfig, raster: &MultiBandRaster) -> Result<Band> {
    let filtered = asf_raster(&normalize_bands(raster), cfg.asf_radius);
    let g = multiscale_gradient(&filtered, cfg.scales).map_err(stage_err("gradient"))?;
    Ok(g.map(|v| v as f32 as f64))
}

/// Regional minima, connected seeds, pruning and descriptors.
pub fn seeds_stage(
    cfg: &PipelineConfig,
    raster: &MultiBandRaster,
    gradient: &Band,
) -> Result<(SeedSet, SeedReport)> {
    let mask = regional_minima(gradient, cfg.quant_levels).map_err(stage_err("minima"))?;
    let components = connected_components(&mask);
    let before = components.len();
    let pruned = prune_small(components, cfg.min_seed_size).map_err(stage_err("prune"))?;
    let after = pruned.len();
    let seeds =
        describe_seeds(raster, pruned, cfg.red()?, cfg.nir()?).map_err(stage_err("describe"))?;
    Ok((
        seeds,
        SeedReport {
            minima_pixels: mask.count(),
            before_pruning: before,
            after_pruning: after,
        },
    ))
}

/// k-means over the unit-scaled descriptors.
pub fn label_stage(
    cfg: &PipelineConfig,
    raster: &MultiBandRaster,
    seeds: SeedSet,
) -> Result<(SeedSet, LabelReport)> {
    let ranges = raster.band_ranges();
    if let Some(r) = seeds.regions.iter().find(|r| r.descriptor.len() != ranges.len() + 1) {
        return Err(Error::Value(format!(
            "seed {} has {} descriptor components, expected {}",
            r.id,
            r.descriptor.len(),
            ranges.len() + 1
        )));
    }
    let descriptors: Vec<Vec<f64>> = seeds
        .regions
        .iter()
        .map(|r| scale_descriptor(&r.descriptor, &ranges))
        .collect();
    let result: KMeansResult = best_of_restarts(
        &descriptors,
        cfg.k,
        cfg.restarts,
        cfg.prng_seed,
        cfg.kmeans_max_iter,
    )
    .map_err(stage_err("label"))?;
    if result.k() < cfg.k {
        log::warn!(
            "k lowered from {} to {}: only {} distinct seed descriptors",
            cfg.k,
            result.k(),
            result.k()
        );
    }
    let report = LabelReport {
        k_requested: cfg.k,
        k_used: result.k(),
        separation: result.separation.is_finite().then_some(result.separation),
        inertia: result.inertia,
        iterations: result.iterations,
        converged: result.converged,
    };
    let labeled = apply_labels(seeds, &result).map_err(stage_err("label"))?;
    Ok((labeled, report))
}

/// GrowCut over normalized bands plus scaled NDVI.
pub fn segment_stage(
    cfg: &PipelineConfig,
    raster: &MultiBandRaster,
    seeds: &SeedSet,
) -> Result<(GrowCutOutcome, GrowCutReport)> {
    let vi = ndvi(raster, cfg.red()?, cfg.nir()?).map_err(stage_err("segment"))?;
    let features =
        FeatureGrid::with_ndvi(&normalize_bands(raster), &vi).map_err(stage_err("segment"))?;
    let params = GrowCutParams {
        max_iterations: cfg.max_iterations(raster.width(), raster.height()),
        neighborhood: cfg.neighborhood.into(),
    };
    let start = Instant::now();
    let mut state =
        growcut::init_automaton(&features, seeds, params.neighborhood).map_err(stage_err("segment"))?;
    let outcome = growcut::run(&mut state, &params, cfg.engine.into());
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if !outcome.converged {
        log::warn!("automaton stopped after {} generations without converging", outcome.iterations);
    }
    if outcome.unlabeled > 0 {
        log::warn!("{} cells were never reached", outcome.unlabeled);
    }
    let report = GrowCutReport {
        engine: cfg.engine,
        c_bar: state.c_bar(),
        iterations: outcome.iterations,
        converged: outcome.converged,
        unlabeled: outcome.unlabeled,
        changed_per_generation: outcome.changed_per_generation.clone(),
        visited_cells: outcome.visited_cells,
        wall_ms,
    };
    Ok((outcome, report))
}

/// Polygons and the contour overlay image.
pub fn vectorize_stage(
    cfg: &PipelineConfig,
    raster: &MultiBandRaster,
    labels: &LabelRaster,
) -> Result<(PolygonSet, Vec<u8>)> {
    if (labels.width(), labels.height()) != (raster.width(), raster.height()) {
        return Err(Error::Value("label raster size differs from the input".into()));
    }
    let polygons = trace_contours(labels);
    let bands = cfg.overlay_bands(raster.bands())?;
    let rgb = render_overlay(raster, labels, bands, cfg.overlay_color)
        .map_err(stage_err("vectorize"))?;
    Ok((polygons, encode_ppm(raster.width(), raster.height(), &rgb)))
}

struct Outputs<'a> {
    dir: &'a Path,
    hashes: BTreeMap<String, String>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        format::write(&self.dir.join(name), bytes)?;
        self.hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    fn gradient(&mut self, g: &Band) -> Result<()> {
        let r = MultiBandRaster::from_bands(std::slice::from_ref(g)).map_err(stage_err("gradient"))?;
        let header = format::RasterHeader {
            width: g.width(),
            height: g.height(),
            bands: 1,
            dtype: Dtype::F32Le,
            band_names: None,
        };
        self.write(GRADIENT_HEADER, header.to_text().as_bytes())?;
        self.write(GRADIENT_DATA, &format::encode_raster(&r, Dtype::F32Le)?)
    }

    fn seeds(&mut self, s: &SeedSet) -> Result<()> {
        self.write(SEED_MASK, &encode_mask_pgm(&s.mask()))?;
        self.write(SEEDS, &json::encode_seeds(s))
    }
}

fn prepare(cfg: &PipelineConfig) -> Result<(MultiBandRaster, BTreeMap<String, String>)> {
    cfg.validate(None)?;
    let header_bytes = format::read(&cfg.input_header)?;
    let data_bytes = format::read(&cfg.input_data)?;
    let header = format::RasterHeader::parse(
        std::str::from_utf8(&header_bytes).map_err(|_| Error::Parse("header is not UTF-8".into()))?,
    )?;
    let raster = format::decode_raster(&header, &data_bytes)?;
    cfg.validate(Some(raster.bands()))?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let inputs = BTreeMap::from([
        ("header".to_string(), sha256_hex(&header_bytes)),
        ("data".to_string(), sha256_hex(&data_bytes)),
    ]);
    Ok((raster, inputs))
}

fn timed<T>(timings: &mut Vec<StageTiming>, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f()?;
    timings.push(StageTiming {
        name: name.to_string(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    Ok(out)
}

/// Runs every stage and writes all artifacts plus `manifest.json`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest> {
    let (raster, inputs) = prepare(cfg)?;
    let mut out = Outputs {
        dir: &cfg.output_dir,
        hashes: BTreeMap::new(),
    };
    let mut timings = Vec::new();

    let gradient = timed(&mut timings, "gradient", || gradient_stage(cfg, &raster))?;
    out.gradient(&gradient)?;
    let (seeds, seed_report) = timed(&mut timings, "seeds", || seeds_stage(cfg, &raster, &gradient))?;
    out.seeds(&seeds)?;
    let (labeled, label_report) = timed(&mut timings, "label", || label_stage(cfg, &raster, seeds))?;
    out.write(LABELED_SEEDS, &json::encode_seeds(&labeled))?;
    let (outcome, growcut_report) =
        timed(&mut timings, "segment", || segment_stage(cfg, &raster, &labeled))?;
    out.write(LABELS, &encode_label_pgm(&outcome.labels))?;
    let (polygons, overlay) =
        timed(&mut timings, "vectorize", || vectorize_stage(cfg, &raster, &outcome.labels))?;
    out.write(POLYGONS, &json::encode_polygons(&polygons))?;
    out.write(OVERLAY, &overlay)?;

    let mut resolved = cfg.clone();
    resolved.max_iters = Some(cfg.max_iterations(raster.width(), raster.height()));
    let manifest = RunManifest {
        config: resolved,
        inputs,
        stages: timings,
        seeds: seed_report,
        labeling: label_report,
        growcut: growcut_report,
        outputs: out.hashes,
    };
    let text = serde_json::to_vec_pretty(&manifest)?;
    format::write(&cfg.output_dir.join(MANIFEST), &text)?;
    Ok(manifest)
}

/// What a single stage wrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: String,
    pub wall_ms: f64,
    pub report: serde_json::Value,
    pub outputs: BTreeMap<String, String>,
}

fn require(cfg: &PipelineConfig, stage: &str, name: &str) -> Result<PathBuf> {
    let path = cfg.output_dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Dependency {
            stage: stage.to_string(),
            missing: path,
        })
    }
}

/// Runs one stage from the intermediates already in the output directory and
/// writes its artifacts plus `stage_<name>.json`.
pub fn run_stage(name: &str, cfg: &PipelineConfig) -> Result<StageOutcome> {
    if !STAGES.contains(&name) {
        return Err(Error::Config(format!(
            "unknown stage `{name}` (expected one of {})",
            STAGES.join(", ")
        )));
    }
    // Check prerequisites before touching the input so a missing artifact is
    // reported as such.
    let prerequisites: &[&str] = match name {
        "seeds" => &[GRADIENT_HEADER, GRADIENT_DATA],
        "label" => &[SEEDS],
        "segment" => &[LABELED_SEEDS],
        "vectorize" => &[LABELS],
        _ => &[],
    };
    let paths = prerequisites
        .iter()
        .map(|p| require(cfg, name, p))
        .collect::<Result<Vec<_>>>()?;

    let (raster, _) = prepare(cfg)?;
    let mut out = Outputs {
        dir: &cfg.output_dir,
        hashes: BTreeMap::new(),
    };
    let start = Instant::now();
    let report = match name {
        "gradient" => {
            let g = gradient_stage(cfg, &raster)?;
            out.gradient(&g)?;
            serde_json::json!({ "width": g.width(), "height": g.height() })
        }
        "seeds" => {
            let g = format::load_raster(&paths[0], &paths[1])?;
            if g.bands() != 1 || (g.width(), g.height()) != (raster.width(), raster.height()) {
                return Err(Error::Value("gradient does not match the input raster".into()));
            }
            let (seeds, report) = seeds_stage(cfg, &raster, &g.band(0))?;
            out.seeds(&seeds)?;
            serde_json::to_value(report)?
        }
        "label" => {
            let seeds = json::load_seeds(&paths[0])?;
            let (labeled, report) = label_stage(cfg, &raster, seeds)?;
            out.write(LABELED_SEEDS, &json::encode_seeds(&labeled))?;
            serde_json::to_value(report)?
        }
        "segment" => {
            let seeds = json::load_seeds(&paths[0])?;
            let (outcome, report) = segment_stage(cfg, &raster, &seeds)?;
            out.write(LABELS, &encode_label_pgm(&outcome.labels))?;
            serde_json::to_value(report)?
        }
        "vectorize" => {
            let labels = format::load_label_raster(&paths[0])?;
            let (polygons, overlay) = vectorize_stage(cfg, &raster, &labels)?;
            out.write(POLYGONS, &json::encode_polygons(&polygons))?;
            out.write(OVERLAY, &overlay)?;
            serde_json::json!({ "polygons": polygons.polygons.len() })
        }
        _ => unreachable!("stage names checked above"),
    };
    let outcome = StageOutcome {
        stage: name.to_string(),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        report,
        outputs: out.hashes,
    };
    format::write(
        &cfg.output_dir.join(format!("stage_{name}.json")),
        &serde_json::to_vec_pretty(&outcome)?,
    )?;
    Ok(outcome)
}
