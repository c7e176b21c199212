//! File formats, pipeline orchestration and the `segcli` command line for
//! `growseg-core`.

pub mod config;
pub mod error;
pub mod format;
pub mod json;
pub mod pipeline;
pub mod synthetic;

pub use config::{EngineName, NeighborhoodName, Overrides, PipelineConfig};
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, run_stage, RunManifest, StageOutcome, STAGES};
