//! Crate-wide error type.
//!
//! Every fallible public operation returns [`Result`]. Variants carry enough
//! context (paths, dimensions, parameter values) to diagnose a failure from
//! the message alone, without a backtrace.

use std::path::PathBuf;

/// Unified error for image I/O, transforms, embedding, and benchmarking.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// File could not be read or written.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Container parsed but the format is not one we accept.
    #[error("{path}: unsupported bit depth or sample format ({detail})")]
    UnsupportedBitDepth { path: PathBuf, detail: String },

    /// File is not a decodable PNG/PPM image.
    #[error("{path}: malformed image ({detail})")]
    MalformedImage { path: PathBuf, detail: String },

    /// Buffer construction or operation input violates a shape contract.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Operation requires a different colorspace than the buffer carries.
    #[error("colorspace mismatch: expected {expected}, got {got}")]
    ColorspaceMismatch { expected: String, got: String },

    /// Numeric parameter outside its documented domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Inverse transform asked to realize a spectrum that is not conjugate
    /// symmetric: the imaginary residual exceeded the tolerance.
    #[error("spectrum is not conjugate-symmetric (max imaginary residual {residual:.3e} > {tolerance:.1e})")]
    NotHermitian { residual: f64, tolerance: f64 },

    /// Iterative routine failed to reach tolerance.
    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence { routine: &'static str, iterations: usize },

    /// Band annulus selects no frequency bins at this raster size.
    #[error("empty annulus: [{r_low}, {r_high}) selects no bins at {width}x{height}")]
    EmptyAnnulus { r_low: f64, r_high: f64, width: usize, height: usize },

    /// Carrier has too few usable coefficients for the payload.
    #[error("capacity overflow: need {needed} carrier slots, only {available} available")]
    Capacity { needed: usize, available: usize },

    /// Message text is not valid for the expected payload length.
    #[error("bad message: {0}")]
    BadMessage(String),

    /// JSON (de)serialization failure for keys or reports.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by file loaders.
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
