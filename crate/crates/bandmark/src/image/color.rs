//! BT.601 full-range color conversion.
//!
//! Luma weights 0.299/0.587/0.114 with the classic analog chroma scale
//! factors: U = 0.492 (B - Y), V = 0.877 (R - Y). No clamping is applied in
//! either direction, so to_yuv followed by from_yuv is exact to floating
//! point rounding.

use super::{Colorspace, ImageBuf};
use crate::error::{Error, Result};

const WR: f64 = 0.299;
const WG: f64 = 0.587;
const WB: f64 = 0.114;
const KU: f64 = 0.492;
const KV: f64 = 0.877;

/// Converts an RGB buffer to YUV.
pub fn to_yuv(img: &ImageBuf) -> Result<ImageBuf> {
    if img.colorspace() != Colorspace::Rgb {
        return Err(Error::ColorspaceMismatch {
            expected: "RGB".into(),
            got: img.colorspace().to_string(),
        });
    }
    let n = img.plane_len();
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let mut data = vec![0.0; 3 * n];
    for i in 0..n {
        let y = WR * r[i] + WG * g[i] + WB * b[i];
        data[i] = y;
        data[n + i] = KU * (b[i] - y);
        data[2 * n + i] = KV * (r[i] - y);
    }
    ImageBuf::from_planar(img.width(), img.height(), Colorspace::Yuv, data)
}

/// Converts a YUV buffer back to RGB. Out-of-gamut values are not clamped.
pub fn from_yuv(img: &ImageBuf) -> Result<ImageBuf> {
    if img.colorspace() != Colorspace::Yuv {
        return Err(Error::ColorspaceMismatch {
            expected: "YUV".into(),
            got: img.colorspace().to_string(),
        });
    }
    let n = img.plane_len();
    let (y, u, v) = (img.plane(0), img.plane(1), img.plane(2));
    let mut data = vec![0.0; 3 * n];
    for i in 0..n {
        let r = y[i] + v[i] / KV;
        let b = y[i] + u[i] / KU;
        let g = (y[i] - WR * r - WB * b) / WG;
        data[i] = r;
        data[n + i] = g;
        data[2 * n + i] = b;
    }
    ImageBuf::from_planar(img.width(), img.height(), Colorspace::Rgb, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_maps_to_unit_luma_zero_chroma() {
        let white = ImageBuf::filled(2, 2, Colorspace::Rgb, 1.0).unwrap();
        let yuv = to_yuv(&white).unwrap();
        for i in 0..4 {
            assert!((yuv.plane(0)[i] - 1.0).abs() < 1e-12);
            assert!(yuv.plane(1)[i].abs() < 1e-12);
            assert!(yuv.plane(2)[i].abs() < 1e-12);
        }
    }

    #[test]
    fn neutral_gray_has_zero_chroma() {
        let gray = ImageBuf::filled(3, 1, Colorspace::Rgb, 0.42).unwrap();
        let yuv = to_yuv(&gray).unwrap();
        assert!(yuv.plane(1).iter().chain(yuv.plane(2)).all(|v| v.abs() < 1e-12));
        assert!(yuv.plane(0).iter().all(|v| (v - 0.42).abs() < 1e-12));
    }

    #[test]
    fn roundtrip_is_exact_within_1e6() {
        // Deterministic pseudo-random RGB values covering the unit cube.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let data: Vec<f64> = (0..3 * 64).map(|_| next()).collect();
        let img = ImageBuf::from_planar(8, 8, Colorspace::Rgb, data).unwrap();
        let back = from_yuv(&to_yuv(&img).unwrap()).unwrap();
        for (a, b) in img.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn wrong_colorspace_is_rejected() {
        let gray = ImageBuf::filled(2, 2, Colorspace::Gray, 0.5).unwrap();
        assert!(to_yuv(&gray).is_err());
        let rgb = ImageBuf::filled(2, 2, Colorspace::Rgb, 0.5).unwrap();
        assert!(from_yuv(&rgb).is_err());
    }
}
