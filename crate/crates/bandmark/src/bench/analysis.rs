//! Frequency-retention analysis: how much of a known spectral pattern
//! survives an attack.
//!
//! Per image, a constant-amplitude ring pattern is added to the spectrum
//! of every channel, both the clean and the patterned image go through
//! the same attack with the same draws, and the magnitude of the spectral
//! difference is averaged over the corpus. Differencing the attacked pair
//! cancels the image content, leaving what the attack did to the pattern.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, Corpus, KahanSum};
use crate::attacks::{apply_params, severity_params, AttackKind};
use crate::error::{Error, Result};
use crate::spectral::{
    band_energy, fft2, ifft2, ring_pattern, spectral_diff, BandName, BandSpec, MagnitudeMap,
};

/// How each per-image difference map is scaled before averaging: not at
/// all, because the inserted pattern is identical for every image, so the
/// single division inside each retention ratio already normalizes by the
/// pre-attack pattern energy.
pub const RETENTION_NORMALIZATION: &str = "band_energy(mean diff map) / band_energy(pattern)";

/// Outcome of one retention run: the surviving fraction of the inserted
/// pattern's energy in each canonical band, plus the averaged difference
/// map it was measured on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    /// The annulus the pattern was inserted into.
    pub band: BandSpec,
    pub kind: AttackKind,
    /// Ladder rung 1..=5, or 0 for the identity control.
    pub severity: u8,
    pub seed: u64,
    pub amplitude: f64,
    pub n_images: usize,
    pub retention_low: f64,
    pub retention_mid: f64,
    pub retention_high: f64,
    pub normalization: String,
    pub mean_diff_map: MagnitudeMap,
}

/// Runs the retention pipeline for one (band, attack, amplitude) cell.
///
/// Severity 0 requests the identity control: both images pass through
/// unchanged, so retention inside the inserted band is exactly 1 and the
/// map is zero elsewhere. Stochastic attacks reuse the same derived seed
/// for the clean and patterned image of a pair, and a different one per
/// image.
pub fn frequency_analysis(
    corpus: &Corpus,
    band: &BandSpec,
    kind: AttackKind,
    severity: u8,
    seed: u64,
    amplitude: f64,
) -> Result<SpectralReport> {
    if corpus.is_empty() {
        return Err(Error::Domain("corpus is empty".into()));
    }
    let (w, h) = (corpus.width(), corpus.height());
    let pattern = ring_pattern(w, h, band, amplitude)?;
    let params = if severity == 0 { None } else { Some(severity_params(kind, severity)?) };

    let maps: Vec<Vec<f64>> = (0..corpus.len())
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let clean = corpus.image(i);
            let mut spec = fft2(&clean);
            pattern.add_to(&mut spec)?;
            let patterned = ifft2(&spec)?;
            let (t_clean, t_patterned) = match &params {
                None => (clean, patterned),
                Some(p) => {
                    let s = derive_seed(seed, 4, i as u64, 0);
                    (apply_params(&clean, p, s)?, apply_params(&patterned, p, s)?)
                }
            };
            let diff = spectral_diff(&t_patterned, &t_clean)?;
            Ok(diff.mean_over_channels().plane(0).to_vec())
        })
        .collect::<Result<_>>()?;

    let mut mean = vec![KahanSum::default(); w * h];
    for map in &maps {
        for (acc, &v) in mean.iter_mut().zip(map) {
            acc.add(v);
        }
    }
    let inv = 1.0 / corpus.len() as f64;
    let mean: Vec<f64> = mean.into_iter().map(|k| k.value() * inv).collect();

    let pattern_map: Vec<f64> = {
        let mut m = vec![0.0; w * h];
        for v in 0..h {
            for u in 0..w {
                m[v * w + u] = pattern.value(u, v);
            }
        }
        m
    };
    let retention = |b: BandName| -> Result<f64> {
        let spec = b.spec();
        let denom = band_energy(&pattern_map, w, h, &spec)?;
        if denom <= 0.0 {
            return Ok(0.0);
        }
        Ok(band_energy(&mean, w, h, &spec)? / denom)
    };

    Ok(SpectralReport {
        band: *band,
        kind,
        severity,
        seed,
        amplitude,
        n_images: corpus.len(),
        retention_low: retention(BandName::Low)?,
        retention_mid: retention(BandName::Mid)?,
        retention_high: retention(BandName::High)?,
        normalization: RETENTION_NORMALIZATION.to_string(),
        mean_diff_map: MagnitudeMap::new(w, h, 1, mean)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synth_corpus;

    #[test]
    fn identity_retention_is_exactly_one_in_inserted_band() {
        let corpus = synth_corpus(4, 64, 64, 11).unwrap();
        let band = BandName::Mid.spec();
        let report =
            frequency_analysis(&corpus, &band, AttackKind::Brightness, 0, 0, 25.0).unwrap();
        assert!(
            (report.retention_mid - 1.0).abs() <= 1e-6,
            "mid retention {}",
            report.retention_mid
        );
        assert!(report.retention_low.abs() <= 1e-6, "low retention {}", report.retention_low);
        assert!(report.retention_high.abs() <= 1e-6, "high retention {}", report.retention_high);
    }

    #[test]
    fn blur_strips_high_band_much_more_than_low() {
        let corpus = synth_corpus(6, 64, 64, 13).unwrap();
        let low =
            frequency_analysis(&corpus, &BandName::Low.spec(), AttackKind::GaussBlur, 3, 5, 25.0)
                .unwrap();
        let high =
            frequency_analysis(&corpus, &BandName::High.spec(), AttackKind::GaussBlur, 3, 5, 25.0)
                .unwrap();
        assert!(high.retention_high < 0.5, "high retention {}", high.retention_high);
        assert!(
            low.retention_low >= 2.0 * high.retention_high,
            "low {} vs high {}",
            low.retention_low,
            high.retention_high
        );
    }

    #[test]
    fn stochastic_attack_reports_are_deterministic() {
        let corpus = synth_corpus(3, 48, 48, 17).unwrap();
        let band = BandName::Low.spec();
        let a = frequency_analysis(&corpus, &band, AttackKind::GaussNoise, 2, 99, 20.0).unwrap();
        let b = frequency_analysis(&corpus, &band, AttackKind::GaussNoise, 2, 99, 20.0).unwrap();
        assert_eq!(a.mean_diff_map.plane(0), b.mean_diff_map.plane(0));
        assert_eq!(a.retention_low, b.retention_low);
    }

    #[test]
    fn inverted_band_is_rejected() {
        let corpus = synth_corpus(1, 32, 32, 1).unwrap();
        assert!(frequency_analysis(
            &corpus,
            &BandSpec { r_low: 0.4, r_high: 0.2 },
            AttackKind::Jpeg,
            1,
            0,
            10.0
        )
        .is_err());
    }
}
