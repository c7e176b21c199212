#![allow(dead_code)]

use std::path::Path;

use segcli::format::Dtype;
use segcli::synthetic::{write_synthetic, RectSpec, SyntheticSpec};
use segcli::PipelineConfig;

/// Two halves with well separated means in every band.
pub fn two_halves(dir: &Path, size: usize, sigma: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        width: size,
        height: size,
        bands: 4,
        dtype: Dtype::U16,
        noise_sigma: sigma,
        seed,
        background: vec![100.0, 120.0, 80.0, 300.0],
        regions: vec![RectSpec {
            x: size / 2,
            y: 0,
            width: size - size / 2,
            height: size,
            means: vec![200.0, 60.0, 180.0, 120.0],
        }],
        band_names: None,
        output_header: dir.join("img.hdr"),
        output_data: dir.join("img.dat"),
        ground_truth: dir.join("truth.pgm"),
    }
}

/// Writes the image for `spec` and returns a config pointing at it.
pub fn setup(spec: &SyntheticSpec, out: &Path) -> PipelineConfig {
    write_synthetic(spec).unwrap();
    PipelineConfig::new(&spec.output_header, &spec.output_data, out, 2, 3)
}

pub fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}
