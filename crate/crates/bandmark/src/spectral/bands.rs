//! Radial frequency-band geometry over the 2-D DFT grid.
//!
//! A bin (u, v) is located by its centered frequency, each axis normalized
//! by its own Nyquist radius, so the radius fraction is
//! sqrt((fu/(W/2))^2 + (fv/(H/2))^2). Corner bins of the square grid sit
//! beyond radius 1; a band whose upper edge reaches 1.0 absorbs them, which
//! keeps the default LOW/MID/HIGH triple an exact partition of every bin
//! except DC.

use num_complex::Complex;

use super::Spectrum;
use crate::error::{Error, Result};
use crate::image::Colorspace;

/// Default band edges: LOW = [0, 0.125), MID = [0.125, 0.375),
/// HIGH = [0.375, 1.0] (top band inclusive of the far corners).
pub const LOW_EDGE: f64 = 0.125;
pub const HIGH_EDGE: f64 = 0.375;

/// Annulus over the centered spectrum, radii as fractions of Nyquist.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BandSpec {
    pub r_low: f64,
    pub r_high: f64,
}

/// The three canonical analysis bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandName {
    Low,
    Mid,
    High,
}

impl BandName {
    pub fn spec(self) -> BandSpec {
        match self {
            BandName::Low => BandSpec { r_low: 0.0, r_high: LOW_EDGE },
            BandName::Mid => BandSpec { r_low: LOW_EDGE, r_high: HIGH_EDGE },
            BandName::High => BandSpec { r_low: HIGH_EDGE, r_high: 1.0 },
        }
    }

    pub const ALL: [BandName; 3] = [BandName::Low, BandName::Mid, BandName::High];
}

impl std::fmt::Display for BandName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BandName::Low => "low",
            BandName::Mid => "mid",
            BandName::High => "high",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BandName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(BandName::Low),
            "mid" => Ok(BandName::Mid),
            "high" => Ok(BandName::High),
            other => Err(Error::Domain(format!("unknown band \"{other}\" (low|mid|high)"))),
        }
    }
}

impl BandSpec {
    pub fn new(r_low: f64, r_high: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r_low) || !(r_low < r_high && r_high <= 1.0) {
            return Err(Error::Domain(format!(
                "band radii must satisfy 0 <= r_low < r_high <= 1, got [{r_low}, {r_high})"
            )));
        }
        Ok(BandSpec { r_low, r_high })
    }

    /// Membership test for one bin. The interval is half-open except that an
    /// upper edge of 1.0 extends to the grid corners; DC never belongs.
    pub fn contains(&self, u: usize, v: usize, width: usize, height: usize) -> bool {
        if u == 0 && v == 0 {
            return false;
        }
        let r = radius_fraction(u, v, width, height);
        let hi = if self.r_high >= 1.0 { f64::INFINITY } else { self.r_high };
        r >= self.r_low && r < hi
    }
}

/// Centered radius of bin (u, v) as a fraction of the Nyquist radius.
pub fn radius_fraction(u: usize, v: usize, width: usize, height: usize) -> f64 {
    let fu = if u <= width / 2 { u as f64 } else { u as f64 - width as f64 };
    let fv = if v <= height / 2 { v as f64 } else { v as f64 - height as f64 };
    let nu = width as f64 / 2.0;
    let nv = height as f64 / 2.0;
    ((fu / nu).powi(2) + (fv / nv).powi(2)).sqrt()
}

/// Boolean mask over all bins, row-major with u fastest.
pub fn band_mask(width: usize, height: usize, band: &BandSpec) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    for v in 0..height {
        for u in 0..width {
            mask[v * width + u] = band.contains(u, v, width, height);
        }
    }
    mask
}

/// Constant-amplitude annulus in the frequency plane.
///
/// The support is exactly `band_mask` of the same annulus, so the pattern
/// is conjugate-symmetric and its inverse transform is real.
#[derive(Debug, Clone)]
pub struct RingPattern {
    width: usize,
    height: usize,
    amplitude: f64,
    mask: Vec<bool>,
    bin_count: usize,
}

/// Builds a ring pattern; errors if the annulus selects no bins.
pub fn ring_pattern(
    width: usize,
    height: usize,
    band: &BandSpec,
    amplitude: f64,
) -> Result<RingPattern> {
    if amplitude <= 0.0 || !amplitude.is_finite() {
        return Err(Error::Domain(format!("ring amplitude must be positive, got {amplitude}")));
    }
    let mask = band_mask(width, height, band);
    let bin_count = mask.iter().filter(|&&m| m).count();
    if bin_count == 0 {
        return Err(Error::EmptyAnnulus {
            r_low: band.r_low,
            r_high: band.r_high,
            width,
            height,
        });
    }
    Ok(RingPattern { width, height, amplitude, mask, bin_count })
}

impl RingPattern {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Total squared magnitude: amplitude^2 times the number of set bins.
    pub fn energy(&self) -> f64 {
        self.amplitude * self.amplitude * self.bin_count as f64
    }

    /// Pattern magnitude at one bin.
    pub fn value(&self, u: usize, v: usize) -> f64 {
        if self.mask[v * self.width + u] {
            self.amplitude
        } else {
            0.0
        }
    }

    /// Adds the pattern to the real part of every channel of a spectrum.
    pub fn add_to(&self, spec: &mut Spectrum) -> Result<()> {
        if spec.width() != self.width || spec.height() != self.height {
            return Err(Error::ShapeMismatch(format!(
                "pattern {}x{} vs spectrum {}x{}",
                self.width,
                self.height,
                spec.width(),
                spec.height()
            )));
        }
        for c in 0..spec.channels() {
            let bins = spec.bins_mut(c);
            for (bin, &m) in bins.iter_mut().zip(&self.mask) {
                if m {
                    bin.re += self.amplitude;
                }
            }
        }
        Ok(())
    }

    /// Realizes the pattern alone as a single-channel spectrum.
    pub fn to_spectrum(&self) -> Spectrum {
        let mut spec = Spectrum::zero(self.width, self.height, Colorspace::Gray);
        let bins = spec.bins_mut(0);
        for (bin, &m) in bins.iter_mut().zip(&self.mask) {
            if m {
                *bin = Complex::new(self.amplitude, 0.0);
            }
        }
        spec
    }
}

/// Sum of squared magnitudes of a real-valued map over a band's bins.
pub fn band_energy(map: &[f64], width: usize, height: usize, band: &BandSpec) -> Result<f64> {
    if map.len() != width * height {
        return Err(Error::ShapeMismatch(format!(
            "map length {} does not match {width}x{height}",
            map.len()
        )));
    }
    let mut acc = 0.0;
    for v in 0..height {
        for u in 0..width {
            if band.contains(u, v, width, height) {
                let x = map[v * width + u];
                acc += x * x;
            }
        }
    }
    Ok(acc)
}
