//! Spatial kernels for the blur-family attacks.
//!
//! All kernels use reflect padding (mirror with edge repeat), which avoids
//! the dark frame a zero pad would smear into low-frequency content.

use crate::error::{Error, Result};
use crate::image::ImageBuf;

/// Mirrors an out-of-range index back into `[0, n)`, repeating the edge
/// sample: -1 -> 0, -2 -> 1, n -> n-1. Folds as often as needed.
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * n;
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - 1 - i;
    }
    i as usize
}

/// Bilinear read at fractional coordinates, reflect-padded.
pub(crate) fn sample_bilinear(plane: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let x0 = x0 as isize;
    let y0 = y0 as isize;
    let xa = reflect(x0, w);
    let xb = reflect(x0 + 1, w);
    let ya = reflect(y0, h);
    let yb = reflect(y0 + 1, h);
    let top = plane[ya * w + xa] * (1.0 - fx) + plane[ya * w + xb] * fx;
    let bot = plane[yb * w + xa] * (1.0 - fx) + plane[yb * w + xb] * fx;
    top * (1.0 - fy) + bot * fy
}

/// Separable convolution applying the same symmetric 1-D taps along x then y.
fn convolve_separable(img: &ImageBuf, taps: &[f64]) -> ImageBuf {
    let (w, h) = (img.width(), img.height());
    let half = taps.len() as isize / 2;
    let mut out = img.clone();
    let mut tmp = vec![0.0; w * h];
    for c in 0..img.colorspace().channels() {
        let src = img.plane(c);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (t, &k) in taps.iter().enumerate() {
                    let xi = reflect(x as isize + t as isize - half, w);
                    acc += k * src[y * w + xi];
                }
                tmp[y * w + x] = acc;
            }
        }
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (t, &k) in taps.iter().enumerate() {
                    let yi = reflect(y as isize + t as isize - half, h);
                    acc += k * tmp[yi * w + x];
                }
                dst[y * w + x] = acc;
            }
        }
    }
    out
}

/// Dense 2-D convolution with an odd-sized kernel, reflect-padded.
fn convolve2d(img: &ImageBuf, kernel: &[f64], kw: usize, kh: usize) -> ImageBuf {
    let (w, h) = (img.width(), img.height());
    let (hx, hy) = (kw as isize / 2, kh as isize / 2);
    let mut out = img.clone();
    for c in 0..img.colorspace().channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for ky in 0..kh {
                    let yi = reflect(y as isize + ky as isize - hy, h);
                    for kx in 0..kw {
                        let xi = reflect(x as isize + kx as isize - hx, w);
                        acc += kernel[ky * kw + kx] * src[yi * w + xi];
                    }
                }
                dst[y * w + x] = acc;
            }
        }
    }
    out
}

/// Gaussian blur with an explicit odd kernel width.
pub fn gauss_blur(img: &ImageBuf, kernel: usize, sigma: f64) -> Result<ImageBuf> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(Error::Domain(format!("gaussian kernel width must be odd, got {kernel}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("gaussian sigma must be positive, got {sigma}")));
    }
    let half = kernel as isize / 2;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    Ok(convolve_separable(img, &taps))
}

/// Defocus blur: normalized disk kernel of the given integer radius.
pub fn defocus_blur(img: &ImageBuf, radius: usize) -> Result<ImageBuf> {
    if radius == 0 {
        return Err(Error::Domain("defocus radius must be at least 1".into()));
    }
    let r = radius as isize;
    let kw = 2 * radius + 1;
    let mut kernel = vec![0.0; kw * kw];
    let mut count = 0usize;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                kernel[(dy + r) as usize * kw + (dx + r) as usize] = 1.0;
                count += 1;
            }
        }
    }
    for k in &mut kernel {
        *k /= count as f64;
    }
    Ok(convolve2d(img, &kernel, kw, kw))
}

/// Motion blur: mean of `length` bilinear reads along a line at `angle`.
pub fn motion_blur(img: &ImageBuf, length: usize, angle: f64) -> Result<ImageBuf> {
    if length == 0 {
        return Err(Error::Domain("motion length must be at least 1".into()));
    }
    if !angle.is_finite() {
        return Err(Error::Domain("motion angle must be finite".into()));
    }
    let (w, h) = (img.width(), img.height());
    let (dx, dy) = (angle.cos(), angle.sin());
    let mid = (length as f64 - 1.0) / 2.0;
    let mut out = img.clone();
    for c in 0..img.colorspace().channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for t in 0..length {
                    let d = t as f64 - mid;
                    acc += sample_bilinear(src, w, h, x as f64 + d * dx, y as f64 + d * dy);
                }
                dst[y * w + x] = acc / length as f64;
            }
        }
    }
    Ok(out)
}

/// Zoom blur: mean over `steps` center zooms with scales spaced evenly in
/// `[1, max_scale]`.
pub fn zoom_blur(img: &ImageBuf, max_scale: f64, steps: usize) -> Result<ImageBuf> {
    if !(max_scale.is_finite() && max_scale >= 1.0) {
        return Err(Error::Domain(format!("zoom max scale must be >= 1, got {max_scale}")));
    }
    if steps == 0 {
        return Err(Error::Domain("zoom needs at least one step".into()));
    }
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let denom = (steps - 1).max(1) as f64;
    let mut out = ImageBuf::filled(w, h, img.colorspace(), 0.0)?;
    for c in 0..img.colorspace().channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for i in 0..steps {
            let scale = 1.0 + (max_scale - 1.0) * i as f64 / denom;
            for y in 0..h {
                for x in 0..w {
                    let sx = cx + (x as f64 - cx) / scale;
                    let sy = cy + (y as f64 - cy) / scale;
                    dst[y * w + x] += sample_bilinear(src, w, h, sx, sy);
                }
            }
        }
        for v in dst.iter_mut() {
            *v /= steps as f64;
        }
    }
    Ok(out)
}

/// Replaces each `block`-by-`block` tile with its mean. Edge tiles shrink.
pub fn pixelate(img: &ImageBuf, block: usize) -> Result<ImageBuf> {
    if block == 0 {
        return Err(Error::Domain("pixelate block size must be at least 1".into()));
    }
    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    for c in 0..img.colorspace().channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for ty in (0..h).step_by(block) {
            for tx in (0..w).step_by(block) {
                let y_end = (ty + block).min(h);
                let x_end = (tx + block).min(w);
                let mut acc = 0.0;
                for y in ty..y_end {
                    for x in tx..x_end {
                        acc += src[y * w + x];
                    }
                }
                let mean = acc / ((y_end - ty) * (x_end - tx)) as f64;
                for y in ty..y_end {
                    for x in tx..x_end {
                        dst[y * w + x] = mean;
                    }
                }
            }
        }
    }
    Ok(out)
}
