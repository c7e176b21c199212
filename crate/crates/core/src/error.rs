use core::fmt;

/// Errors raised by the in-memory algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Buffer length does not match the declared dimensions.
    Size { expected: usize, actual: usize },
    /// A NaN or infinite sample.
    NonFinite { index: usize },
    /// Zero width, height or band count.
    EmptyDimensions,
    /// A band index outside the raster.
    BandIndex { index: usize, bands: usize },
    /// Two arguments that must differ (e.g. red and NIR band) are equal.
    SameBand(usize),
    /// No seed regions left, or none carrying a label.
    EmptySeeds,
    /// Clustering was given no descriptors.
    EmptyInput,
    /// Descriptors of different lengths.
    DescriptorLength { expected: usize, actual: usize },
    /// Some parameter outside its documented range.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Size { expected, actual } => {
                write!(f, "expected {expected} values, got {actual}")
            }
            Error::NonFinite { index } => write!(f, "non-finite value at index {index}"),
            Error::EmptyDimensions => f.write_str("raster dimensions must be positive"),
            Error::BandIndex { index, bands } => {
                write!(f, "band index {index} out of range for {bands} bands")
            }
            Error::SameBand(b) => write!(f, "band {b} given twice"),
            Error::EmptySeeds => f.write_str("no seed regions remain"),
            Error::EmptyInput => f.write_str("no descriptors to cluster"),
            Error::DescriptorLength { expected, actual } => {
                write!(f, "descriptor has {actual} components, expected {expected}")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
