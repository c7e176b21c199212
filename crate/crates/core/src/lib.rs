//! Unsupervised segmentation of multispectral rasters.
//!
//! The pipeline has three phases:
//!
//! 1. **Seed detection.** The bands are smoothed with an alternating
//!    sequential filter, a multiscale morphological gradient is taken and
//!    its regional minima become candidate seeds ([`morphology`], [`seeding`]).
//! 2. **Seed labeling.** Every connected seed is described by its per-band
//!    mode plus mean NDVI and the descriptors are grouped with k-means
//!    ([`clustering`]).
//! 3. **Growth.** A GrowCut cellular automaton lets the labeled seeds compete
//!    for the rest of the image ([`growcut`]). The final label raster can be
//!    traced into polygons ([`vectorize`]).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line live in the `segcli` crate. Enabling the `parallel`
//! feature runs the per-pixel sweeps on rayon; results are bit-identical to
//! the sequential code.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod clustering;
mod error;
pub mod growcut;
pub mod morphology;
mod par;
pub mod raster;
pub mod seeding;
pub mod vectorize;

pub use error::Error;
pub use raster::{Band, LabelRaster, MultiBandRaster};

pub type Result<T, E = Error> = core::result::Result<T, E>;
