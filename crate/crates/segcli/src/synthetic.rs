//! Test-image generator: axis-aligned rectangles with per-band means and
//! Gaussian noise, plus the ground-truth label raster.

use std::path::{Path, PathBuf};

use growseg_core::{LabelRaster, MultiBandRaster};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{self, encode_label_pgm, Dtype, RasterHeader};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSpec {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub means: Vec<f64>,
}

/// Ground truth: background is label 1, rectangle `i` is label `i + 2`;
/// later rectangles paint over earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    #[serde(default = "default_dtype")]
    pub dtype: Dtype,
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    pub background: Vec<f64>,
    #[serde(default)]
    pub regions: Vec<RectSpec>,
    #[serde(default)]
    pub band_names: Option<Vec<String>>,
    pub output_header: PathBuf,
    pub output_data: PathBuf,
    pub ground_truth: PathBuf,
}

fn default_dtype() -> Dtype {
    Dtype::F32Le
}

impl SyntheticSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut spec: SyntheticSpec =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(base) = path.parent() {
            for p in [&mut spec.output_header, &mut spec.output_data, &mut spec.ground_truth] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.width == 0 || self.height == 0 || self.bands == 0 {
            return bad("width, height and bands must be positive".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be finite and non-negative".into());
        }
        if self.regions.len() + 1 > u16::MAX as usize {
            return bad("too many regions".into());
        }
        if self.background.len() != self.bands {
            return bad(format!("background has {} means, expected {}", self.background.len(), self.bands));
        }
        for (i, r) in self.regions.iter().enumerate() {
            if r.means.len() != self.bands {
                return bad(format!("region {i} has {} means, expected {}", r.means.len(), self.bands));
            }
            if r.width == 0 || r.height == 0 || r.x + r.width > self.width || r.y + r.height > self.height {
                return bad(format!("region {i} does not fit inside the image"));
            }
        }
        if let Some(names) = &self.band_names {
            if names.len() != self.bands {
                return bad("band_names length differs from bands".into());
            }
        }
        Ok(())
    }
}

/// Builds the image and its ground truth in memory. Integer dtypes round and
/// clamp each sample to the representable range.
pub fn generate(spec: &SyntheticSpec) -> Result<(MultiBandRaster, LabelRaster)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut truth = vec![1u16; w * h];
    for (i, r) in spec.regions.iter().enumerate() {
        for y in r.y..r.y + r.height {
            truth[y * w + r.x..y * w + r.x + r.width].fill(i as u16 + 2);
        }
    }
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(w * h * spec.bands);
    for b in 0..spec.bands {
        for &t in &truth {
            let mean = match t {
                1 => spec.background[b],
                l => spec.regions[l as usize - 2].means[b],
            };
            let v = mean + noise.sample(&mut rng);
            data.push(match spec.dtype {
                Dtype::U8 => v.round().clamp(0.0, u8::MAX as f64),
                Dtype::U16 => v.round().clamp(0.0, u16::MAX as f64),
                Dtype::F32Le => v as f32 as f64,
            });
        }
    }
    let raster = MultiBandRaster::new(w, h, spec.bands, data).map_err(|source| Error::Stage {
        stage: "gen-synthetic",
        source,
    })?;
    let labels = LabelRaster::new(w, h, truth).map_err(|source| Error::Stage {
        stage: "gen-synthetic",
        source,
    })?;
    Ok((raster, labels))
}

/// Generates and writes the header, data and ground-truth PGM.
pub fn write_synthetic(spec: &SyntheticSpec) -> Result<(MultiBandRaster, LabelRaster)> {
    let (raster, truth) = generate(spec)?;
    let header = RasterHeader {
        width: spec.width,
        height: spec.height,
        bands: spec.bands,
        dtype: spec.dtype,
        band_names: spec.band_names.clone(),
    };
    for p in [&spec.output_header, &spec.output_data, &spec.ground_truth] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    format::write(&spec.output_header, header.to_text().as_bytes())?;
    format::write(&spec.output_data, &format::encode_raster(&raster, spec.dtype)?)?;
    format::write(&spec.ground_truth, &encode_label_pgm(&truth))?;
    Ok((raster, truth))
}
