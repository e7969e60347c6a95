//! Separable bilinear resampling with half-pixel-centered coordinates.
//!
//! Destination pixel x maps to source coordinate (x + 0.5) * sw/dw - 0.5;
//! taps outside the raster clamp to the edge sample. Weights are convex, so
//! resampling never overshoots the input range, and resizing to the same
//! dimensions reproduces the input exactly.

use super::ImageBuf;
use crate::error::{Error, Result};

struct Tap {
    lo: usize,
    hi: usize,
    w_hi: f64,
}

fn taps(src: usize, dst: usize) -> Vec<Tap> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale - 0.5;
            let floor = center.floor();
            let frac = center - floor;
            let lo = (floor as isize).clamp(0, src as isize - 1) as usize;
            let hi = (floor as isize + 1).clamp(0, src as isize - 1) as usize;
            Tap { lo, hi, w_hi: frac }
        })
        .collect()
}

/// Resizes to `dst_w` x `dst_h`, preserving channel count and colorspace.
pub fn resize_bilinear(img: &ImageBuf, dst_w: usize, dst_h: usize) -> Result<ImageBuf> {
    if dst_w == 0 || dst_h == 0 {
        return Err(Error::ShapeMismatch(format!(
            "target dimensions must be positive, got {dst_w}x{dst_h}"
        )));
    }
    let (sw, sh) = (img.width(), img.height());
    if dst_w == sw && dst_h == sh {
        return Ok(img.clone());
    }
    let hx = taps(sw, dst_w);
    let vy = taps(sh, dst_h);
    let mut out = vec![0.0; dst_w * dst_h * img.channels()];
    let mut row_pass = vec![0.0; dst_w * sh];
    for c in 0..img.channels() {
        let src = img.plane(c);
        for y in 0..sh {
            let row = &src[y * sw..(y + 1) * sw];
            for (x, t) in hx.iter().enumerate() {
                row_pass[y * dst_w + x] = row[t.lo] * (1.0 - t.w_hi) + row[t.hi] * t.w_hi;
            }
        }
        let dst = &mut out[c * dst_w * dst_h..(c + 1) * dst_w * dst_h];
        for (y, t) in vy.iter().enumerate() {
            for x in 0..dst_w {
                dst[y * dst_w + x] = row_pass[t.lo * dst_w + x] * (1.0 - t.w_hi)
                    + row_pass[t.hi * dst_w + x] * t.w_hi;
            }
        }
    }
    ImageBuf::from_planar(dst_w, dst_h, img.colorspace(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Colorspace;

    #[test]
    fn upsample_2x1_to_4x1_matches_hand_evaluation() {
        // Half-pixel mapping of [0, 1]: centers land at source coordinates
        // -0.25, 0.25, 0.75, 1.25, clamping the outer taps to the edges.
        let img = ImageBuf::from_planar(2, 1, Colorspace::Gray, vec![0.0, 1.0]).unwrap();
        let up = resize_bilinear(&img, 4, 1).unwrap();
        let expected = [0.0, 0.25, 0.75, 1.0];
        for (got, want) in up.plane(0).iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn downsample_4x1_to_2x1_box_averages_pairs() {
        let img = ImageBuf::from_planar(4, 1, Colorspace::Gray, vec![0.1, 0.3, 0.5, 0.9]).unwrap();
        let down = resize_bilinear(&img, 2, 1).unwrap();
        assert!((down.plane(0)[0] - 0.2).abs() < 1e-12);
        assert!((down.plane(0)[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn same_size_is_exact_identity() {
        let data: Vec<f64> = (0..4 * 6 * 3).map(|i| (i as f64 * 0.137) % 1.0).collect();
        let img = ImageBuf::from_planar(4, 6, Colorspace::Rgb, data).unwrap();
        let same = resize_bilinear(&img, 4, 6).unwrap();
        assert_eq!(img.samples(), same.samples());
    }

    #[test]
    fn resampling_never_overshoots_input_range() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let data: Vec<f64> = (0..16 * 16).map(|_| next()).collect();
        let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let img = ImageBuf::from_planar(16, 16, Colorspace::Gray, data).unwrap();
        for (w, h) in [(7, 31), (33, 5), (64, 64), (3, 3)] {
            let r = resize_bilinear(&img, w, h).unwrap();
            for &v in r.plane(0) {
                assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = ImageBuf::filled(10, 8, Colorspace::Rgb, 0.6).unwrap();
        let r = resize_bilinear(&img, 23, 3).unwrap();
        assert!(r.samples().iter().all(|&v| (v - 0.6).abs() < 1e-12));
    }
}
