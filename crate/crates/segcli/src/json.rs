//! JSON documents for seed sets and polygons.

use std::path::Path;

use growseg_core::seeding::{SeedRegion, SeedSet};
use growseg_core::vectorize::{Polygon, PolygonSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{read, write};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRegionDoc {
    pub id: u32,
    pub pixels: Vec<[usize; 2]>,
    pub descriptor: Vec<f64>,
    pub label: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSetDoc {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<SeedRegionDoc>,
}

impl From<&SeedSet> for SeedSetDoc {
    fn from(s: &SeedSet) -> Self {
        SeedSetDoc {
            width: s.width,
            height: s.height,
            regions: s
                .regions
                .iter()
                .map(|r| SeedRegionDoc {
                    id: r.id,
                    pixels: r.pixels.iter().map(|&(x, y)| [x, y]).collect(),
                    descriptor: r.descriptor.clone(),
                    label: r.cluster_label,
                })
                .collect(),
        }
    }
}

impl SeedSetDoc {
    pub fn into_seed_set(self) -> Result<SeedSet> {
        for r in &self.regions {
            if let Some(&[x, y]) = r.pixels.iter().find(|p| p[0] >= self.width || p[1] >= self.height) {
                return Err(Error::Value(format!(
                    "seed {} pixel ({x}, {y}) outside {}x{}",
                    r.id, self.width, self.height
                )));
            }
        }
        Ok(SeedSet {
            width: self.width,
            height: self.height,
            regions: self
                .regions
                .into_iter()
                .map(|r| SeedRegion {
                    id: r.id,
                    pixels: r.pixels.into_iter().map(|[x, y]| (x, y)).collect(),
                    descriptor: r.descriptor,
                    cluster_label: r.label,
                })
                .collect(),
        })
    }
}

pub fn encode_seeds(s: &SeedSet) -> Vec<u8> {
    serde_json::to_vec(&SeedSetDoc::from(s)).expect("seed documents serialize")
}

pub fn save_seeds(s: &SeedSet, path: &Path) -> Result<()> {
    write(path, &encode_seeds(s))
}

pub fn load_seeds(path: &Path) -> Result<SeedSet> {
    let doc: SeedSetDoc = serde_json::from_slice(&read(path)?)?;
    doc.into_seed_set()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonDoc {
    pub label: u16,
    pub ring: Vec<[i64; 2]>,
    pub holes: Vec<Vec<[i64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonSetDoc {
    pub polygons: Vec<PolygonDoc>,
}

fn ring_doc(ring: &[(i64, i64)]) -> Vec<[i64; 2]> {
    ring.iter().map(|&(x, y)| [x, y]).collect()
}

fn ring_from_doc(ring: Vec<[i64; 2]>) -> Result<Vec<(i64, i64)>> {
    if ring.len() < 4 || ring.first() != ring.last() {
        return Err(Error::Value("polygon ring is not closed".into()));
    }
    Ok(ring.into_iter().map(|[x, y]| (x, y)).collect())
}

impl From<&PolygonSet> for PolygonSetDoc {
    fn from(p: &PolygonSet) -> Self {
        PolygonSetDoc {
            polygons: p
                .polygons
                .iter()
                .map(|poly| PolygonDoc {
                    label: poly.label,
                    ring: ring_doc(&poly.ring),
                    holes: poly.holes.iter().map(|h| ring_doc(h)).collect(),
                })
                .collect(),
        }
    }
}

impl PolygonSetDoc {
    pub fn into_polygon_set(self) -> Result<PolygonSet> {
        let polygons = self
            .polygons
            .into_iter()
            .map(|p| {
                Ok(Polygon {
                    label: p.label,
                    ring: ring_from_doc(p.ring)?,
                    holes: p.holes.into_iter().map(ring_from_doc).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(PolygonSet { polygons })
    }
}

pub fn encode_polygons(p: &PolygonSet) -> Vec<u8> {
    serde_json::to_vec(&PolygonSetDoc::from(p)).expect("polygon documents serialize")
}

pub fn parse_polygons(bytes: &[u8]) -> Result<PolygonSet> {
    serde_json::from_slice::<PolygonSetDoc>(bytes)?.into_polygon_set()
}

pub fn export_polygons(p: &PolygonSet, path: &Path) -> Result<()> {
    write(path, &encode_polygons(p))
}

pub fn load_polygons(path: &Path) -> Result<PolygonSet> {
    parse_polygons(&read(path)?)
}
