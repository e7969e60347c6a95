//! Full-reference quality metrics: MSE, PSNR, SSIM, and YUV-domain MSE.

use super::{color, Colorspace, ImageBuf};
use crate::error::{Error, Result};

fn check_shapes(a: &ImageBuf, b: &ImageBuf) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch(format!(
            "metric inputs differ: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    Ok(())
}

/// Mean squared error over all samples of both buffers.
pub fn mse(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    check_shapes(a, b)?;
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(sum / a.samples().len() as f64)
}

/// Peak signal-to-noise ratio in dB against a unit peak.
/// Identical inputs give positive infinity.
pub fn psnr(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    let e = mse(a, b)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / e).log10())
}

/// MSE computed in YUV space, all three planes weighted equally.
/// RGB inputs are converted; YUV inputs are used as-is.
pub fn mse_yuv(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    check_shapes(a, b)?;
    let conv = |img: &ImageBuf| -> Result<ImageBuf> {
        match img.colorspace() {
            Colorspace::Rgb => color::to_yuv(img),
            Colorspace::Yuv => Ok(img.clone()),
            Colorspace::Gray => Err(Error::ColorspaceMismatch {
                expected: "RGB or YUV".into(),
                got: "GRAY".into(),
            }),
        }
    };
    mse(&conv(a)?, &conv(b)?)
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        sum += *v;
    }
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Valid-region separable convolution with the 11-tap window.
fn window_filter(src: &[f64], w: usize, h: usize, win: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, wk) in win.iter().enumerate() {
                acc += wk * src[y * w + x + k];
            }
            rows[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, wk) in win.iter().enumerate() {
                acc += wk * rows[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

fn luminance_plane(img: &ImageBuf) -> Result<Vec<f64>> {
    match img.colorspace() {
        Colorspace::Gray => Ok(img.plane(0).to_vec()),
        Colorspace::Yuv => Ok(img.plane(0).to_vec()),
        Colorspace::Rgb => {
            let yuv = color::to_yuv(img)?;
            Ok(yuv.plane(0).to_vec())
        }
    }
}

/// Mean structural similarity over the luminance plane.
///
/// Gaussian-weighted 11x11 statistics (sigma 1.5) on the valid interior,
/// stabilizers K1=0.01, K2=0.03 against unit dynamic range. Errors if either
/// dimension is smaller than the window.
pub fn ssim(a: &ImageBuf, b: &ImageBuf) -> Result<f64> {
    check_shapes(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ShapeMismatch(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let la = luminance_plane(a)?;
    let lb = luminance_plane(b)?;
    let win = gaussian_window();

    let mu_a = window_filter(&la, w, h, &win);
    let mu_b = window_filter(&lb, w, h, &win);
    let sq_a: Vec<f64> = la.iter().map(|v| v * v).collect();
    let sq_b: Vec<f64> = lb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
    let e_aa = window_filter(&sq_a, w, h, &win);
    let e_bb = window_filter(&sq_b, w, h, &win);
    let e_ab = window_filter(&ab, w, h, &win);

    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let mut acc = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        let den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
        acc += num / den;
    }
    Ok(acc / mu_a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> ImageBuf {
        let data: Vec<f64> = (0..w * h)
            .map(|i| {
                let x = (i % w) as f64;
                let y = (i / w) as f64;
                0.5 + 0.3 * (x * 0.7).sin() * (y * 0.33).cos() + 0.1 * ((x + y) * 0.11).sin()
            })
            .collect();
        ImageBuf::from_planar(w, h, Colorspace::Gray, data).unwrap()
    }

    #[test]
    fn psnr_of_uniform_one_lsb_difference() {
        // A constant offset of 1/255 has MSE (1/255)^2, so PSNR is
        // 20*log10(255) = 48.1308 dB.
        let a = ImageBuf::filled(16, 16, Colorspace::Gray, 0.5).unwrap();
        let b = ImageBuf::filled(16, 16, Colorspace::Gray, 0.5 + 1.0 / 255.0).unwrap();
        let expected = 20.0 * 255.0f64.log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let a = textured(16, 16);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_is_symmetric() {
        let a = textured(20, 14);
        let mut b = a.clone();
        for (i, v) in b.samples_mut().iter_mut().enumerate() {
            *v += ((i % 7) as f64 - 3.0) * 0.01;
        }
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn ssim_identical_is_one() {
        let a = textured(32, 24);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_of_inverted_texture_is_negative() {
        let a = textured(32, 32);
        let inv_data: Vec<f64> = a.samples().iter().map(|v| 1.0 - v).collect();
        let b = ImageBuf::from_planar(32, 32, Colorspace::Gray, inv_data).unwrap();
        assert!(ssim(&a, &b).unwrap() < 0.0);
    }

    #[test]
    fn ssim_rejects_images_smaller_than_window() {
        let a = ImageBuf::filled(10, 32, Colorspace::Gray, 0.5).unwrap();
        assert!(ssim(&a, &a).is_err());
    }

    #[test]
    fn ssim_stays_in_unit_interval_for_noisy_pair() {
        let a = textured(24, 24);
        let mut b = a.clone();
        let mut state = 99u64;
        for v in b.samples_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v += ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.2;
        }
        let s = ssim(&a, &b).unwrap();
        assert!((-1.0..=1.0).contains(&s), "{s}");
        assert!(s < 1.0);
    }

    #[test]
    fn mse_yuv_is_symmetric_and_zero_iff_equal() {
        let a = {
            let data: Vec<f64> = (0..12 * 12 * 3).map(|i| ((i * 29) % 97) as f64 / 96.0).collect();
            ImageBuf::from_planar(12, 12, Colorspace::Rgb, data).unwrap()
        };
        let mut b = a.clone();
        assert_eq!(mse_yuv(&a, &b).unwrap(), 0.0);
        b.samples_mut()[5] += 0.25;
        let ab = mse_yuv(&a, &b).unwrap();
        assert!(ab > 0.0);
        assert!((ab - mse_yuv(&b, &a).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn metrics_reject_shape_mismatch() {
        let a = ImageBuf::filled(8, 8, Colorspace::Gray, 0.5).unwrap();
        let b = ImageBuf::filled(8, 9, Colorspace::Gray, 0.5).unwrap();
        assert!(mse(&a, &b).is_err());
        assert!(psnr(&a, &b).is_err());
    }
}
