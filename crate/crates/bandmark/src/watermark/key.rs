//! Embedding methods, keys, and their JSON wire form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three embedding schemes shipped by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    /// Quantization of Fourier magnitudes over a keyed low/mid-frequency annulus.
    Lfqim,
    /// Coefficient-pair ordering inside DCT blocks of the wavelet HL band.
    DwtDct,
    /// Quantization of the leading singular value of DCT blocks in the wavelet LL band.
    DwtDctSvd,
}

impl MethodId {
    pub const ALL: [MethodId; 3] = [MethodId::Lfqim, MethodId::DwtDct, MethodId::DwtDctSvd];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Lfqim => "lfqim",
            MethodId::DwtDct => "dwt_dct",
            MethodId::DwtDctSvd => "dwt_dct_svd",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lfqim" => Ok(MethodId::Lfqim),
            "dwt_dct" => Ok(MethodId::DwtDct),
            "dwt_dct_svd" => Ok(MethodId::DwtDctSvd),
            other => Err(Error::Domain(format!(
                "unknown method {other:?}; expected lfqim, dwt_dct, or dwt_dct_svd"
            ))),
        }
    }
}

/// Secret parameters shared between embed and extract.
///
/// A key is a flat record covering every method; each method reads the fields
/// it needs. `native` is the resolution the scheme is defined at; larger
/// images are handled by embedding at `native` and upsampling the residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatermarkKey {
    /// Seed for all keyed permutations and sign whitening.
    pub seed: u64,
    /// Payload length in bits.
    pub k: usize,
    /// Quantization step for Fourier magnitudes, as a fraction of mean
    /// magnitude scale (multiplied by `width * height` internally).
    pub delta: f64,
    /// Inner radius of the carrier annulus, as a fraction of Nyquist.
    pub r_low: f64,
    /// Outer radius of the carrier annulus, as a fraction of Nyquist.
    pub r_high: f64,
    /// Frequency bins carrying each payload bit; odd so majority votes
    /// cannot tie.
    pub m: usize,
    /// Detection margin for the coefficient-pair scheme.
    pub margin: f64,
    /// Quantization step for the leading singular value scheme.
    pub sigma_step: f64,
    /// Resolution the scheme embeds at, `[width, height]`.
    pub native: [usize; 2],
}

impl WatermarkKey {
    /// Calibrated defaults for `method` under the given seed.
    pub fn new(method: MethodId, seed: u64) -> Self {
        let k = match method {
            MethodId::Lfqim => 100,
            MethodId::DwtDct | MethodId::DwtDctSvd => 30,
        };
        Self::with_payload(method, seed, k)
    }

    /// Calibrated defaults with an explicit payload length.
    pub fn with_payload(_method: MethodId, seed: u64, k: usize) -> Self {
        Self {
            seed,
            k,
            delta: 8.0e-4,
            r_low: 0.05,
            r_high: 0.25,
            m: 9,
            margin: 0.08,
            sigma_step: 0.18,
            native: [256, 256],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("key payload length must be positive".into()));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        if !(0.0 <= self.r_low && self.r_low < self.r_high && self.r_high <= 1.0) {
            return Err(Error::Domain(format!(
                "annulus radii must satisfy 0 <= r_low < r_high <= 1, got [{}, {})",
                self.r_low, self.r_high
            )));
        }
        if self.m < 3 || self.m % 2 == 0 {
            return Err(Error::Domain(format!(
                "bins per bit must be odd and at least 3, got {}",
                self.m
            )));
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(Error::Domain(format!("margin must be positive, got {}", self.margin)));
        }
        if !(self.sigma_step.is_finite() && self.sigma_step > 0.0) {
            return Err(Error::Domain(format!(
                "sigma_step must be positive, got {}",
                self.sigma_step
            )));
        }
        if self.native[0] == 0 || self.native[1] == 0 {
            return Err(Error::Domain("native resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let key: WatermarkKey = serde_json::from_str(&text)?;
        key.validate()?;
        Ok(key)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
