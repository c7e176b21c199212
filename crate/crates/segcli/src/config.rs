//! Pipeline configuration, read from JSON and overridable from the command
//! line.

use std::path::{Path, PathBuf};

use growseg_core::growcut::{Engine, Neighborhood};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum NeighborhoodName {
    #[default]
    #[serde(rename = "moore8")]
    Moore8,
    #[serde(rename = "vn4")]
    Vn4,
}

impl From<NeighborhoodName> for Neighborhood {
    fn from(n: NeighborhoodName) -> Self {
        match n {
            NeighborhoodName::Moore8 => Neighborhood::Moore8,
            NeighborhoodName::Vn4 => Neighborhood::VonNeumann4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineName {
    Synchronous,
    #[default]
    ActiveSet,
}

impl From<EngineName> for Engine {
    fn from(e: EngineName) -> Self {
        match e {
            EngineName::Synchronous => Engine::Synchronous,
            EngineName::ActiveSet => Engine::ActiveSet,
        }
    }
}

fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn sixty_four() -> usize {
    64
}
fn four() -> usize {
    4
}
fn twenty() -> usize {
    20
}
fn ten() -> usize {
    10
}
fn hundred() -> usize {
    100
}
fn yellow() -> [u8; 3] {
    [255, 255, 0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub input_header: PathBuf,
    pub input_data: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub asf_radius: usize,
    #[serde(default = "two")]
    pub scales: usize,
    #[serde(default = "sixty_four")]
    pub quant_levels: usize,
    #[serde(default = "four")]
    pub min_seed_size: usize,
    pub red_band: Option<usize>,
    pub nir_band: Option<usize>,
    #[serde(default = "twenty")]
    pub k: usize,
    #[serde(default = "ten")]
    pub restarts: usize,
    #[serde(default)]
    pub prng_seed: u64,
    #[serde(default)]
    pub neighborhood: NeighborhoodName,
    /// `None` means `width + height`.
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default = "hundred")]
    pub kmeans_max_iter: usize,
    #[serde(default)]
    pub engine: EngineName,
    /// Bands shown as R, G, B in the overlay; `None` picks NIR, red and the
    /// first remaining band (false-color infrared).
    #[serde(default)]
    pub rgb_bands: Option<[usize; 3]>,
    #[serde(default = "yellow")]
    pub overlay_color: [u8; 3],
}

impl PipelineConfig {
    /// A configuration with every default filled in.
    pub fn new(
        input_header: impl Into<PathBuf>,
        input_data: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
        red_band: usize,
        nir_band: usize,
    ) -> Self {
        PipelineConfig {
            input_header: input_header.into(),
            input_data: input_data.into(),
            output_dir: output_dir.into(),
            asf_radius: one(),
            scales: two(),
            quant_levels: sixty_four(),
            min_seed_size: four(),
            red_band: Some(red_band),
            nir_band: Some(nir_band),
            k: twenty(),
            restarts: ten(),
            prng_seed: 0,
            neighborhood: NeighborhoodName::Moore8,
            max_iters: None,
            kmeans_max_iter: hundred(),
            engine: EngineName::ActiveSet,
            rgb_bands: None,
            overlay_color: yellow(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(base) = path.parent() {
            for p in [&mut cfg.input_header, &mut cfg.input_data, &mut cfg.output_dir] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn red(&self) -> Result<usize> {
        self.red_band
            .ok_or_else(|| Error::Config("red_band is required".into()))
    }

    pub fn nir(&self) -> Result<usize> {
        self.nir_band
            .ok_or_else(|| Error::Config("nir_band is required".into()))
    }

    /// Range checks; band indices are checked against `bands` when given.
    pub fn validate(&self, bands: Option<usize>) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        let (red, nir) = (self.red()?, self.nir()?);
        if red == nir {
            return bad("red_band and nir_band must differ");
        }
        if self.asf_radius < 1 {
            return bad("asf_radius must be at least 1");
        }
        if self.scales < 1 {
            return bad("scales must be at least 1");
        }
        if self.quant_levels < 2 {
            return bad("quant_levels must be at least 2");
        }
        if self.min_seed_size < 1 {
            return bad("min_seed_size must be at least 1");
        }
        if self.k < 1 || self.k > u16::MAX as usize - 1 {
            return bad("k must be between 1 and 65534");
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if self.kmeans_max_iter < 1 {
            return bad("kmeans_max_iter must be at least 1");
        }
        if self.max_iters == Some(0) {
            return bad("max_iters must be at least 1");
        }
        if let Some(n) = bands {
            let mut indices = vec![red, nir];
            indices.extend(self.rgb_bands.iter().flatten());
            if let Some(i) = indices.into_iter().find(|&i| i >= n) {
                return Err(Error::Config(format!("band index {i} out of range for {n} bands")));
            }
        }
        Ok(())
    }

    /// Overlay bands, resolving the default false-color choice.
    pub fn overlay_bands(&self, bands: usize) -> Result<[usize; 3]> {
        if let Some(b) = self.rgb_bands {
            return Ok(b);
        }
        let (red, nir) = (self.red()?, self.nir()?);
        let third = (0..bands).find(|&b| b != red && b != nir).unwrap_or(red);
        Ok([nir, red, third])
    }

    /// Generation cap for a raster of the given size.
    pub fn max_iterations(&self, width: usize, height: usize) -> usize {
        self.max_iters.unwrap_or(width + height)
    }
}

/// Command-line overrides; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub asf_radius: Option<usize>,
    pub scales: Option<usize>,
    pub quant_levels: Option<usize>,
    pub min_seed_size: Option<usize>,
    pub red_band: Option<usize>,
    pub nir_band: Option<usize>,
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub prng_seed: Option<u64>,
    pub neighborhood: Option<NeighborhoodName>,
    pub max_iters: Option<usize>,
    pub engine: Option<EngineName>,
    pub rgb_bands: Option<[usize; 3]>,
    pub overlay_color: Option<[u8; 3]>,
}

impl Overrides {
    pub fn apply(self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(output_dir, asf_radius, scales, quant_levels, min_seed_size, k, restarts, prng_seed, neighborhood, engine, overlay_color);
        if self.red_band.is_some() {
            cfg.red_band = self.red_band;
        }
        if self.nir_band.is_some() {
            cfg.nir_band = self.nir_band;
        }
        if self.max_iters.is_some() {
            cfg.max_iters = self.max_iters;
        }
        if self.rgb_bands.is_some() {
            cfg.rgb_bands = self.rgb_bands;
        }
    }
}
