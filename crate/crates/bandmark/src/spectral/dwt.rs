//! Single-level orthonormal Haar wavelet transform.
//!
//! Analysis filters (a+b)/sqrt(2) and (a-b)/sqrt(2) run along rows first,
//! then columns, producing four half-resolution sub-bands. Sub-band names
//! use the row-direction filter first: `hl` is high-pass across x,
//! low-pass across y. The transform is orthonormal, so a constant image c
//! yields an LL band of 2c and sample energy is preserved exactly.

use super::{Error, Result};
use crate::image::{Colorspace, ImageBuf};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Half-resolution sub-bands of a single Haar analysis step.
#[derive(Debug, Clone)]
pub struct DwtBands {
    pub width: usize,
    pub height: usize,
    pub ll: Vec<f64>,
    pub hl: Vec<f64>,
    pub lh: Vec<f64>,
    pub hh: Vec<f64>,
}

/// Forward single-level Haar transform of a GRAY image with even dimensions.
pub fn haar_dwt2(img: &ImageBuf) -> Result<DwtBands> {
    if img.colorspace() != Colorspace::Gray {
        return Err(Error::ColorspaceMismatch {
            expected: "GRAY".into(),
            got: img.colorspace().to_string(),
        });
    }
    let (w, h) = (img.width(), img.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "haar transform needs even dimensions, got {w}x{h}"
        )));
    }
    let (hw, hh_dim) = (w / 2, h / 2);
    let src = img.plane(0);

    // Row pass: each row shrinks to hw low + hw high samples.
    let mut low = vec![0.0; hw * h];
    let mut high = vec![0.0; hw * h];
    for y in 0..h {
        for i in 0..hw {
            let a = src[y * w + 2 * i];
            let b = src[y * w + 2 * i + 1];
            low[y * hw + i] = (a + b) * INV_SQRT2;
            high[y * hw + i] = (a - b) * INV_SQRT2;
        }
    }

    // Column pass over both intermediates.
    let mut bands = DwtBands {
        width: hw,
        height: hh_dim,
        ll: vec![0.0; hw * hh_dim],
        hl: vec![0.0; hw * hh_dim],
        lh: vec![0.0; hw * hh_dim],
        hh: vec![0.0; hw * hh_dim],
    };
    for j in 0..hh_dim {
        for i in 0..hw {
            let (a, b) = (low[(2 * j) * hw + i], low[(2 * j + 1) * hw + i]);
            bands.ll[j * hw + i] = (a + b) * INV_SQRT2;
            bands.lh[j * hw + i] = (a - b) * INV_SQRT2;
            let (a, b) = (high[(2 * j) * hw + i], high[(2 * j + 1) * hw + i]);
            bands.hl[j * hw + i] = (a + b) * INV_SQRT2;
            bands.hh[j * hw + i] = (a - b) * INV_SQRT2;
        }
    }
    Ok(bands)
}

/// Inverse of [`haar_dwt2`], exact to floating point rounding.
pub fn haar_idwt2(bands: &DwtBands) -> Result<ImageBuf> {
    let (hw, hh_dim) = (bands.width, bands.height);
    let n = hw * hh_dim;
    if bands.ll.len() != n || bands.hl.len() != n || bands.lh.len() != n || bands.hh.len() != n {
        return Err(Error::ShapeMismatch("sub-band lengths disagree with dimensions".into()));
    }
    let (w, h) = (hw * 2, hh_dim * 2);

    // Undo the column pass.
    let mut low = vec![0.0; hw * h];
    let mut high = vec![0.0; hw * h];
    for j in 0..hh_dim {
        for i in 0..hw {
            let (s, d) = (bands.ll[j * hw + i], bands.lh[j * hw + i]);
            low[(2 * j) * hw + i] = (s + d) * INV_SQRT2;
            low[(2 * j + 1) * hw + i] = (s - d) * INV_SQRT2;
            let (s, d) = (bands.hl[j * hw + i], bands.hh[j * hw + i]);
            high[(2 * j) * hw + i] = (s + d) * INV_SQRT2;
            high[(2 * j + 1) * hw + i] = (s - d) * INV_SQRT2;
        }
    }

    // Undo the row pass.
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for i in 0..hw {
            let (s, d) = (low[y * hw + i], high[y * hw + i]);
            out[y * w + 2 * i] = (s + d) * INV_SQRT2;
            out[y * w + 2 * i + 1] = (s - d) * INV_SQRT2;
        }
    }
    ImageBuf::from_planar(w, h, Colorspace::Gray, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_image(w: usize, h: usize, seed: u64) -> ImageBuf {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let data: Vec<f64> = (0..w * h).map(|_| next()).collect();
        ImageBuf::from_planar(w, h, Colorspace::Gray, data).unwrap()
    }

    #[test]
    fn two_by_two_matches_hand_derivation() {
        // For [a b; c d] the orthonormal Haar step gives
        // ll=(a+b+c+d)/2, hl=(a-b+c-d)/2, lh=(a+b-c-d)/2, hh=(a-b-c+d)/2.
        let img =
            ImageBuf::from_planar(2, 2, Colorspace::Gray, vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        let b = haar_dwt2(&img).unwrap();
        assert!((b.ll[0] - 5.5).abs() < 1e-12);
        assert!((b.hl[0] - -1.5).abs() < 1e-12);
        assert!((b.lh[0] - -2.5).abs() < 1e-12);
        assert!((b.hh[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_image_maps_to_doubled_ll() {
        let img = ImageBuf::filled(16, 10, Colorspace::Gray, 0.4).unwrap();
        let b = haar_dwt2(&img).unwrap();
        assert!(b.ll.iter().all(|v| (v - 0.8).abs() < 1e-12));
        for band in [&b.hl, &b.lh, &b.hh] {
            assert!(band.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn roundtrip_is_exact() {
        let img = pseudo_image(32, 24, 11);
        let back = haar_idwt2(&haar_dwt2(&img).unwrap()).unwrap();
        for (a, b) in img.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn energy_is_conserved() {
        let img = pseudo_image(20, 14, 5);
        let b = haar_dwt2(&img).unwrap();
        let spatial: f64 = img.samples().iter().map(|v| v * v).sum();
        let bands: f64 = [&b.ll, &b.hl, &b.lh, &b.hh]
            .iter()
            .flat_map(|band| band.iter())
            .map(|v| v * v)
            .sum();
        assert!((spatial - bands).abs() / spatial < 1e-8);
    }

    #[test]
    fn odd_dimensions_are_rejected() {
        let img = ImageBuf::filled(7, 8, Colorspace::Gray, 0.5).unwrap();
        assert!(haar_dwt2(&img).is_err());
        let img = ImageBuf::filled(8, 7, Colorspace::Gray, 0.5).unwrap();
        assert!(haar_dwt2(&img).is_err());
    }

    #[test]
    fn horizontal_step_lands_in_hl() {
        // Columns alternating 1,0 vary along x only: detail goes to hl.
        let data: Vec<f64> =
            (0..8 * 8).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let img = ImageBuf::from_planar(8, 8, Colorspace::Gray, data).unwrap();
        let b = haar_dwt2(&img).unwrap();
        assert!(b.hl.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(b.lh.iter().all(|v| v.abs() < 1e-12));
        assert!(b.hh.iter().all(|v| v.abs() < 1e-12));
    }
}
