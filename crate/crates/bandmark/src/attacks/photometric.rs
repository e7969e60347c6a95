//! Per-pixel value attacks: color adjustments and the four noise models.
//!
//! Stochastic attacks draw from the RNG in a fixed raster order (plane-major
//! for per-sample noise, pixel-major for impulse noise), so outputs are a
//! pure function of (image, parameters, seed).

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::image::{from_yuv, to_yuv, Colorspace, ImageBuf};

fn check_rgb(img: &ImageBuf) -> Result<()> {
    if img.colorspace() != Colorspace::Rgb {
        return Err(Error::ColorspaceMismatch {
            expected: Colorspace::Rgb.to_string(),
            got: img.colorspace().to_string(),
        });
    }
    Ok(())
}

fn check_factor(name: &str, factor: f64) -> Result<()> {
    if !(factor.is_finite() && factor >= 0.0) {
        return Err(Error::Domain(format!("{name} factor must be nonnegative, got {factor}")));
    }
    Ok(())
}

/// Scales both chroma channels in YUV by `factor` (1.0 is identity,
/// 0.0 is grayscale).
pub fn saturation(img: &ImageBuf, factor: f64) -> Result<ImageBuf> {
    check_rgb(img)?;
    check_factor("saturation", factor)?;
    let mut yuv = to_yuv(img)?;
    for c in 1..3 {
        for v in yuv.plane_mut(c) {
            *v *= factor;
        }
    }
    from_yuv(&yuv)
}

/// Scales contrast about mid-gray: `v -> 0.5 + factor * (v - 0.5)`.
pub fn contrast(img: &ImageBuf, factor: f64) -> Result<ImageBuf> {
    check_rgb(img)?;
    check_factor("contrast", factor)?;
    let mut out = img.clone();
    for v in out.samples_mut() {
        *v = 0.5 + factor * (*v - 0.5);
    }
    Ok(out)
}

/// Multiplies every sample by `factor`.
pub fn brightness(img: &ImageBuf, factor: f64) -> Result<ImageBuf> {
    check_rgb(img)?;
    check_factor("brightness", factor)?;
    let mut out = img.clone();
    for v in out.samples_mut() {
        *v *= factor;
    }
    Ok(out)
}

/// Adds iid Gaussian noise per sample.
///
/// Standard normal draws are scaled by `sigma` after the fact, so for a fixed
/// seed the perturbation grows pointwise with `sigma`.
pub fn gauss_noise<R: Rng + ?Sized>(img: &ImageBuf, sigma: f64, rng: &mut R) -> Result<ImageBuf> {
    check_rgb(img)?;
    check_factor("noise sigma", sigma)?;
    let mut out = img.clone();
    for v in out.samples_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *v += sigma * n;
    }
    Ok(out)
}

/// Poisson photon-counting noise: each sample becomes
/// `Poisson(v * photons) / photons`.
pub fn shot_noise<R: Rng + ?Sized>(img: &ImageBuf, photons: f64, rng: &mut R) -> Result<ImageBuf> {
    check_rgb(img)?;
    if !(photons.is_finite() && photons > 0.0) {
        return Err(Error::Domain(format!("photon count must be positive, got {photons}")));
    }
    let mut out = img.clone();
    for v in out.samples_mut() {
        let lambda = *v * photons;
        *v = if lambda > 0.0 {
            let p = Poisson::new(lambda)
                .map_err(|e| Error::Domain(format!("invalid Poisson rate {lambda}: {e}")))?;
            p.sample(rng) / photons
        } else {
            0.0
        };
    }
    Ok(out)
}

/// Salt-and-pepper noise: each pixel is replaced across all channels with
/// probability `fraction`, half the time by black and half by white.
///
/// The corruption and polarity draws are separate, so for a fixed seed the
/// corrupted pixel set grows monotonically with `fraction`.
pub fn impulse_noise<R: Rng + ?Sized>(
    img: &ImageBuf,
    fraction: f64,
    rng: &mut R,
) -> Result<ImageBuf> {
    check_rgb(img)?;
    if !(fraction.is_finite() && (0.0..=1.0).contains(&fraction)) {
        return Err(Error::Domain(format!("impulse fraction must lie in [0, 1], got {fraction}")));
    }
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            let hit = rng.random::<f64>() < fraction;
            let white = rng.random::<bool>();
            if hit {
                let value = if white { 1.0 } else { 0.0 };
                for c in 0..3 {
                    out.set(c, x, y, value);
                }
            }
        }
    }
    Ok(out)
}

/// Multiplicative speckle: `v -> v * (1 + sigma * n)` with standard normal n.
pub fn speckle_noise<R: Rng + ?Sized>(
    img: &ImageBuf,
    sigma: f64,
    rng: &mut R,
) -> Result<ImageBuf> {
    check_rgb(img)?;
    check_factor("noise sigma", sigma)?;
    let mut out = img.clone();
    for v in out.samples_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *v *= 1.0 + sigma * n;
    }
    Ok(out)
}
