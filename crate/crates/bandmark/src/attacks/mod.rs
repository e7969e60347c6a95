//! Thirteen-distortion attack suite with graded severity ladders.
//!
//! Each attack kind carries a published five-step parameter ladder running
//! from mild (1) to severe (5). The ladder is versioned: recorded benchmark
//! results are only comparable between runs that used the same
//! [`LADDER_VERSION`]. Stochastic attacks derive every draw from the spec's
//! seed, so a (image, spec) pair always produces the same output.

mod jpeg;
mod kernels;
mod photometric;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageBuf;

pub use jpeg::jpeg_roundtrip;
pub use kernels::{defocus_blur, gauss_blur, motion_blur, pixelate, zoom_blur};
pub use photometric::{
    brightness, contrast, gauss_noise, impulse_noise, saturation, shot_noise, speckle_noise,
};

/// Version of the severity ladder below. Changing any ladder entry is a
/// breaking change for recorded benchmarks and must bump this.
pub const LADDER_VERSION: &str = "1.0.0";

/// The thirteen supported distortion kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttackKind {
    Saturation,
    Contrast,
    Brightness,
    Jpeg,
    GaussNoise,
    ShotNoise,
    ImpulseNoise,
    SpeckleNoise,
    Pixelate,
    DefocusBlur,
    ZoomBlur,
    GaussBlur,
    MotionBlur,
}

impl AttackKind {
    pub const ALL: [AttackKind; 13] = [
        AttackKind::Saturation,
        AttackKind::Contrast,
        AttackKind::Brightness,
        AttackKind::Jpeg,
        AttackKind::GaussNoise,
        AttackKind::ShotNoise,
        AttackKind::ImpulseNoise,
        AttackKind::SpeckleNoise,
        AttackKind::Pixelate,
        AttackKind::DefocusBlur,
        AttackKind::ZoomBlur,
        AttackKind::GaussBlur,
        AttackKind::MotionBlur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Saturation => "SATURATION",
            AttackKind::Contrast => "CONTRAST",
            AttackKind::Brightness => "BRIGHTNESS",
            AttackKind::Jpeg => "JPEG",
            AttackKind::GaussNoise => "GAUSS_NOISE",
            AttackKind::ShotNoise => "SHOT_NOISE",
            AttackKind::ImpulseNoise => "IMPULSE_NOISE",
            AttackKind::SpeckleNoise => "SPECKLE_NOISE",
            AttackKind::Pixelate => "PIXELATE",
            AttackKind::DefocusBlur => "DEFOCUS_BLUR",
            AttackKind::ZoomBlur => "ZOOM_BLUR",
            AttackKind::GaussBlur => "GAUSS_BLUR",
            AttackKind::MotionBlur => "MOTION_BLUR",
        }
    }

    /// True for the kinds whose output depends on the seed.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            AttackKind::GaussNoise
                | AttackKind::ShotNoise
                | AttackKind::ImpulseNoise
                | AttackKind::SpeckleNoise
                | AttackKind::MotionBlur
        )
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let canon = s.to_ascii_uppercase();
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name() == canon)
            .ok_or_else(|| Error::Domain(format!("unknown attack kind {s:?}")))
    }
}

/// An attack request: kind, severity rung, and the seed driving any
/// stochastic choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub severity: u8,
    pub seed: u64,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, severity: u8, seed: u64) -> Result<Self> {
        check_severity(severity)?;
        Ok(Self { kind, severity, seed })
    }
}

fn check_severity(severity: u8) -> Result<()> {
    if !(1..=5).contains(&severity) {
        return Err(Error::Domain(format!("severity must lie in [1, 5], got {severity}")));
    }
    Ok(())
}

/// Concrete parameters for one attack invocation. Severity ladders resolve
/// to these; tests may also construct degenerate entries directly (for
/// example brightness 1.0 or pixelate block 1, both exact identities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AttackParams {
    Saturation { factor: f64 },
    Contrast { factor: f64 },
    Brightness { factor: f64 },
    Jpeg { quality: u8 },
    GaussNoise { sigma: f64 },
    ShotNoise { photons: f64 },
    ImpulseNoise { fraction: f64 },
    SpeckleNoise { sigma: f64 },
    Pixelate { block: usize },
    DefocusBlur { radius: usize },
    ZoomBlur { max_scale: f64, steps: usize },
    GaussBlur { kernel: usize, sigma: f64 },
    MotionBlur { length: usize },
}

impl AttackParams {
    pub fn kind(&self) -> AttackKind {
        match self {
            AttackParams::Saturation { .. } => AttackKind::Saturation,
            AttackParams::Contrast { .. } => AttackKind::Contrast,
            AttackParams::Brightness { .. } => AttackKind::Brightness,
            AttackParams::Jpeg { .. } => AttackKind::Jpeg,
            AttackParams::GaussNoise { .. } => AttackKind::GaussNoise,
            AttackParams::ShotNoise { .. } => AttackKind::ShotNoise,
            AttackParams::ImpulseNoise { .. } => AttackKind::ImpulseNoise,
            AttackParams::SpeckleNoise { .. } => AttackKind::SpeckleNoise,
            AttackParams::Pixelate { .. } => AttackKind::Pixelate,
            AttackParams::DefocusBlur { .. } => AttackKind::DefocusBlur,
            AttackParams::ZoomBlur { .. } => AttackKind::ZoomBlur,
            AttackParams::GaussBlur { .. } => AttackKind::GaussBlur,
            AttackParams::MotionBlur { .. } => AttackKind::MotionBlur,
        }
    }
}

/// Resolves a (kind, severity) pair to its published ladder entry.
pub fn severity_params(kind: AttackKind, severity: u8) -> Result<AttackParams> {
    check_severity(severity)?;
    let i = (severity - 1) as usize;
    Ok(match kind {
        AttackKind::Saturation => AttackParams::Saturation { factor: [0.9, 0.8, 0.7, 0.6, 0.5][i] },
        AttackKind::Contrast => AttackParams::Contrast { factor: [0.9, 0.8, 0.7, 0.6, 0.5][i] },
        AttackKind::Brightness => AttackParams::Brightness { factor: [1.1, 1.2, 1.3, 1.4, 1.5][i] },
        AttackKind::Jpeg => AttackParams::Jpeg { quality: [80, 60, 40, 25, 15][i] },
        AttackKind::GaussNoise => {
            AttackParams::GaussNoise { sigma: [0.02, 0.05, 0.08, 0.12, 0.18][i] }
        }
        AttackKind::ShotNoise => {
            AttackParams::ShotNoise { photons: [500.0, 250.0, 100.0, 50.0, 25.0][i] }
        }
        AttackKind::ImpulseNoise => {
            AttackParams::ImpulseNoise { fraction: [0.01, 0.03, 0.06, 0.10, 0.15][i] }
        }
        AttackKind::SpeckleNoise => {
            AttackParams::SpeckleNoise { sigma: [0.05, 0.10, 0.15, 0.20, 0.30][i] }
        }
        AttackKind::Pixelate => AttackParams::Pixelate { block: [2, 4, 8, 12, 16][i] },
        AttackKind::DefocusBlur => AttackParams::DefocusBlur { radius: [1, 2, 3, 5, 7][i] },
        AttackKind::ZoomBlur => {
            AttackParams::ZoomBlur { max_scale: [1.02, 1.06, 1.10, 1.16, 1.22][i], steps: 8 }
        }
        AttackKind::GaussBlur => {
            let (kernel, sigma) = [(3, 0.5), (5, 1.0), (9, 2.0), (13, 3.0), (17, 4.0)][i];
            AttackParams::GaussBlur { kernel, sigma }
        }
        AttackKind::MotionBlur => AttackParams::MotionBlur { length: [3, 5, 9, 13, 17][i] },
    })
}

/// One row of the published ladder dump.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LadderEntry {
    pub severity: u8,
    #[serde(flatten)]
    pub params: AttackParams,
}

/// The full 13 x 5 ladder in kind-major order, for docs and the CLI dump.
pub fn ladder() -> Vec<LadderEntry> {
    let mut out = Vec::with_capacity(AttackKind::ALL.len() * 5);
    for kind in AttackKind::ALL {
        for severity in 1..=5 {
            out.push(LadderEntry { severity, params: severity_params(kind, severity).unwrap() });
        }
    }
    out
}

/// Applies concrete attack parameters. Stochastic kinds derive all their
/// draws from `seed`; the output is clamped to [0, 1].
pub fn apply_params(img: &ImageBuf, params: &AttackParams, seed: u64) -> Result<ImageBuf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = match *params {
        AttackParams::Saturation { factor } => saturation(img, factor)?,
        AttackParams::Contrast { factor } => contrast(img, factor)?,
        AttackParams::Brightness { factor } => brightness(img, factor)?,
        AttackParams::Jpeg { quality } => jpeg_roundtrip(img, quality)?,
        AttackParams::GaussNoise { sigma } => gauss_noise(img, sigma, &mut rng)?,
        AttackParams::ShotNoise { photons } => shot_noise(img, photons, &mut rng)?,
        AttackParams::ImpulseNoise { fraction } => impulse_noise(img, fraction, &mut rng)?,
        AttackParams::SpeckleNoise { sigma } => speckle_noise(img, sigma, &mut rng)?,
        AttackParams::Pixelate { block } => pixelate(img, block)?,
        AttackParams::DefocusBlur { radius } => defocus_blur(img, radius)?,
        AttackParams::ZoomBlur { max_scale, steps } => zoom_blur(img, max_scale, steps)?,
        AttackParams::GaussBlur { kernel, sigma } => gauss_blur(img, kernel, sigma)?,
        AttackParams::MotionBlur { length } => {
            let angle = rng.random::<f64>() * std::f64::consts::PI;
            motion_blur(img, length, angle)?
        }
    };
    out.clamp_unit();
    Ok(out)
}

/// Applies the ladder entry selected by the spec.
pub fn apply_attack(img: &ImageBuf, spec: &AttackSpec) -> Result<ImageBuf> {
    let params = severity_params(spec.kind, spec.severity)?;
    apply_params(img, &params, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Colorspace;

    fn test_image(w: usize, h: usize) -> ImageBuf {
        let mut img = ImageBuf::filled(w, h, Colorspace::Rgb, 0.0).unwrap();
        for y in 0..h {
            for x in 0..w {
                img.set(0, x, y, (0.5 + 0.4 * ((x * 7 + y * 3) as f64 * 0.11).sin()).clamp(0.0, 1.0));
                img.set(1, x, y, (x as f64 / w as f64 * 0.8 + 0.1).clamp(0.0, 1.0));
                img.set(2, x, y, (y as f64 / h as f64 * 0.8 + 0.1).clamp(0.0, 1.0));
            }
        }
        img
    }

    #[test]
    fn ladder_is_complete_and_frozen_rows_match() {
        let rows = ladder();
        assert_eq!(rows.len(), 13 * 5);
        assert_eq!(
            severity_params(AttackKind::GaussBlur, 3).unwrap(),
            AttackParams::GaussBlur { kernel: 9, sigma: 2.0 }
        );
        assert_eq!(
            severity_params(AttackKind::Jpeg, 1).unwrap(),
            AttackParams::Jpeg { quality: 80 }
        );
        assert_eq!(
            severity_params(AttackKind::Pixelate, 5).unwrap(),
            AttackParams::Pixelate { block: 16 }
        );
    }

    #[test]
    fn severity_out_of_range_rejected() {
        assert!(severity_params(AttackKind::Jpeg, 0).is_err());
        assert!(severity_params(AttackKind::Jpeg, 6).is_err());
        assert!(AttackSpec::new(AttackKind::Jpeg, 0, 1).is_err());
    }

    #[test]
    fn kind_names_roundtrip() {
        for kind in AttackKind::ALL {
            assert_eq!(kind.name().parse::<AttackKind>().unwrap(), kind);
            assert_eq!(kind.name().to_lowercase().parse::<AttackKind>().unwrap(), kind);
        }
        assert!("SEPIA".parse::<AttackKind>().is_err());
    }

    #[test]
    fn params_serialize_with_kind_tag() {
        let text = serde_json::to_string(&AttackParams::GaussBlur { kernel: 9, sigma: 2.0 }).unwrap();
        assert_eq!(text, r#"{"kind":"GAUSS_BLUR","kernel":9,"sigma":2.0}"#);
        let row = LadderEntry { severity: 2, params: AttackParams::Jpeg { quality: 60 } };
        assert_eq!(serde_json::to_string(&row).unwrap(), r#"{"severity":2,"kind":"JPEG","quality":60}"#);
    }

    #[test]
    fn identity_hooks_are_exact() {
        let img = test_image(24, 16);
        let out = apply_params(&img, &AttackParams::Brightness { factor: 1.0 }, 0).unwrap();
        assert_eq!(out.samples(), img.samples());
        let out = apply_params(&img, &AttackParams::Pixelate { block: 1 }, 0).unwrap();
        assert_eq!(out.samples(), img.samples());
    }

    #[test]
    fn every_cell_produces_bounded_output() {
        let img = test_image(32, 24);
        for kind in AttackKind::ALL {
            for severity in 1..=5 {
                let spec = AttackSpec::new(kind, severity, 17).unwrap();
                let out = apply_attack(&img, &spec).unwrap();
                assert_eq!((out.width(), out.height()), (32, 24));
                assert!(
                    out.samples().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)),
                    "{kind} severity {severity} left the unit range"
                );
            }
        }
    }

    #[test]
    fn stochastic_attacks_reproduce_per_seed() {
        let img = test_image(32, 32);
        for kind in AttackKind::ALL.into_iter().filter(|k| k.is_stochastic()) {
            let spec = AttackSpec::new(kind, 3, 99).unwrap();
            let a = apply_attack(&img, &spec).unwrap();
            let b = apply_attack(&img, &spec).unwrap();
            assert_eq!(a.samples(), b.samples(), "{kind} not reproducible");
            let other = AttackSpec::new(kind, 3, 100).unwrap();
            let c = apply_attack(&img, &other).unwrap();
            assert_ne!(a.samples(), c.samples(), "{kind} ignored its seed");
        }
    }

    #[test]
    fn deterministic_attacks_ignore_seed() {
        let img = test_image(32, 32);
        for kind in AttackKind::ALL.into_iter().filter(|k| !k.is_stochastic()) {
            let a = apply_attack(&img, &AttackSpec::new(kind, 2, 1).unwrap()).unwrap();
            let b = apply_attack(&img, &AttackSpec::new(kind, 2, 2).unwrap()).unwrap();
            assert_eq!(a.samples(), b.samples(), "{kind} unexpectedly used the seed");
        }
    }
}
