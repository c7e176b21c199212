//! On-disk formats.
//!
//! Rasters are a text header plus a raw band-sequential data file:
//!
//! ```text
//! # comments are allowed
//! width 128
//! height 96
//! bands 4
//! dtype u16
//! ```
//!
//! `dtype` is one of `u8`, `u16` or `f32le`; multi-byte samples are little
//! endian. Label rasters are binary 16-bit PGM (big endian, maxval 65535),
//! masks 8-bit PGM and overlays binary PPM.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use growseg_core::morphology::BinaryMask;
use growseg_core::{LabelRaster, MultiBandRaster};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dtype {
    #[serde(rename = "u8")]
    U8,
    #[serde(rename = "u16")]
    U16,
    #[serde(rename = "f32le")]
    F32Le,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::U16 => 2,
            Dtype::F32Le => 4,
        }
    }
}

impl FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u8" => Ok(Dtype::U8),
            "u16" => Ok(Dtype::U16),
            "f32le" => Ok(Dtype::F32Le),
            other => Err(Error::Parse(format!("unknown dtype `{other}`"))),
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dtype::U8 => "u8",
            Dtype::U16 => "u16",
            Dtype::F32Le => "f32le",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterHeader {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub dtype: Dtype,
    pub band_names: Option<Vec<String>>,
}

impl RasterHeader {
    /// Exact byte length of the companion data file.
    pub fn data_len(&self) -> u64 {
        (self.width * self.height * self.bands * self.dtype.size()) as u64
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (mut width, mut height, mut bands, mut dtype, mut names) = (None, None, None, None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let values: Vec<&str> = parts.collect();
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            let single = || match values.as_slice() {
                [v] => Ok(*v),
                _ => Err(bad(&format!("`{key}` takes one value"))),
            };
            let dimension = |slot: &mut Option<usize>| -> Result<()> {
                if slot.is_some() {
                    return Err(bad(&format!("duplicate `{key}`")));
                }
                let v: usize = single()?
                    .parse()
                    .map_err(|_| bad(&format!("`{key}` must be a positive integer")))?;
                if v == 0 {
                    return Err(bad(&format!("`{key}` must be positive")));
                }
                *slot = Some(v);
                Ok(())
            };
            match key {
                "width" => dimension(&mut width)?,
                "height" => dimension(&mut height)?,
                "bands" => dimension(&mut bands)?,
                "dtype" => {
                    if dtype.is_some() {
                        return Err(bad("duplicate `dtype`"));
                    }
                    dtype = Some(single()?.parse()?);
                }
                "band_names" => names = Some(values.iter().map(|s| s.to_string()).collect()),
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("header is missing `{k}`"));
        let header = RasterHeader {
            width: width.ok_or_else(|| missing("width"))?,
            height: height.ok_or_else(|| missing("height"))?,
            bands: bands.ok_or_else(|| missing("bands"))?,
            dtype: dtype.ok_or_else(|| missing("dtype"))?,
            band_names: names,
        };
        if let Some(n) = &header.band_names {
            if n.len() != header.bands {
                return Err(Error::Parse(format!(
                    "{} band names for {} bands",
                    n.len(),
                    header.bands
                )));
            }
        }
        Ok(header)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "width {}\nheight {}\nbands {}\ndtype {}\n",
            self.width, self.height, self.bands, self.dtype
        );
        if let Some(names) = &self.band_names {
            s.push_str(&format!("band_names {}\n", names.join(" ")));
        }
        s
    }
}

pub(crate) fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_header(path: &Path) -> Result<RasterHeader> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RasterHeader::parse(&text)
}

/// Decodes band-sequential samples; integers are widened without rescaling.
pub fn decode_raster(header: &RasterHeader, bytes: &[u8]) -> Result<MultiBandRaster> {
    if bytes.len() as u64 != header.data_len() {
        return Err(Error::Size {
            expected: header.data_len(),
            actual: bytes.len() as u64,
        });
    }
    let data: Vec<f64> = match header.dtype {
        Dtype::U8 => bytes.iter().map(|&b| f64::from(b)).collect(),
        Dtype::U16 => bytes
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
        Dtype::F32Le => bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
    };
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Value(format!("non-finite sample at index {i}")));
    }
    MultiBandRaster::new(header.width, header.height, header.bands, data)
        .map_err(|e| Error::Value(e.to_string()))
}

pub fn load_raster(header_path: &Path, data_path: &Path) -> Result<MultiBandRaster> {
    let header = read_header(header_path)?;
    decode_raster(&header, &read(data_path)?)
}

/// Encodes samples as `dtype`. Integer types require integral in-range values.
pub fn encode_raster(r: &MultiBandRaster, dtype: Dtype) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(r.as_slice().len() * dtype.size());
    for (i, &v) in r.as_slice().iter().enumerate() {
        let integral = |max: f64| {
            if v.fract() == 0.0 && (0.0..=max).contains(&v) {
                Ok(v)
            } else {
                Err(Error::Value(format!("sample {i} ({v}) does not fit {dtype}")))
            }
        };
        match dtype {
            Dtype::U8 => out.push(integral(255.0)? as u8),
            Dtype::U16 => out.extend_from_slice(&(integral(65535.0)? as u16).to_le_bytes()),
            Dtype::F32Le => out.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }
    Ok(out)
}

pub fn save_raster(
    header_path: &Path,
    data_path: &Path,
    r: &MultiBandRaster,
    dtype: Dtype,
) -> Result<()> {
    let header = RasterHeader {
        width: r.width(),
        height: r.height(),
        bands: r.bands(),
        dtype,
        band_names: None,
    };
    let bytes = encode_raster(r, dtype)?;
    write(header_path, header.to_text().as_bytes())?;
    write(data_path, &bytes)
}

/// Binary 16-bit PGM, maxval 65535, big-endian samples.
pub fn encode_label_pgm(labels: &LabelRaster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", labels.width(), labels.height()).into_bytes();
    out.reserve(labels.as_slice().len() * 2);
    for &l in labels.as_slice() {
        out.extend_from_slice(&l.to_be_bytes());
    }
    out
}

pub fn save_label_raster(labels: &LabelRaster, path: &Path) -> Result<()> {
    write(path, &encode_label_pgm(labels))
}

// Header tokens of a binary netpbm file; returns them and the offset of the
// first sample byte.
fn pnm_header(bytes: &[u8], magic: &str) -> Result<([usize; 3], usize)> {
    if !bytes.starts_with(magic.as_bytes()) {
        return Err(Error::Parse(format!("expected {magic} magic")));
    }
    let mut pos = magic.len();
    let mut values = [0usize; 3];
    for slot in &mut values {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::Parse("truncated netpbm header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("bad netpbm header value".into()))?;
    }
    // Exactly one whitespace byte separates the header from the samples.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Parse("netpbm header not terminated".into()));
    }
    Ok((values, pos + 1))
}

/// Reads binary PGM (8- or 16-bit) as labels.
pub fn decode_label_pgm(bytes: &[u8]) -> Result<LabelRaster> {
    let ([w, h, maxval], offset) = pnm_header(bytes, "P5")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("invalid maxval {maxval}")));
    }
    let sample = if maxval > 255 { 2 } else { 1 };
    let body = &bytes[offset..];
    let expected = (w * h * sample) as u64;
    if body.len() as u64 != expected {
        return Err(Error::Size {
            expected,
            actual: body.len() as u64,
        });
    }
    let data = if sample == 2 {
        body.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        body.iter().map(|&b| u16::from(b)).collect()
    };
    LabelRaster::new(w, h, data).map_err(|e| Error::Value(e.to_string()))
}

pub fn load_label_raster(path: &Path) -> Result<LabelRaster> {
    decode_label_pgm(&read(path)?)
}

/// 8-bit PGM with set pixels at 255.
pub fn encode_mask_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.as_slice().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Binary PPM from interleaved RGB bytes.
pub fn encode_ppm(width: usize, height: usize, rgb: &[u8]) -> Vec<u8> {
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}
