//! Baseline JPEG distortion model, entropy coding omitted.
//!
//! The pipeline follows the baseline codec stage by stage: full-range YCbCr,
//! 4:2:0 box subsampling, 8x8 orthonormal block DCT (the same scaling the
//! reference quantization path assumes), quantization with the standard
//! luma/chroma tables scaled by the libjpeg quality rule, then the inverse
//! chain. Entropy coding is lossless and cannot move a pixel, so skipping it
//! leaves the distortion model exact.

use crate::error::{Error, Result};
use crate::image::{Colorspace, ImageBuf};
use crate::spectral::{dct2_block, idct2_block, BLOCK};

/// Base luminance quantization table, row-major (row = vertical frequency).
const LUMA_Q: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Base chrominance quantization table, row-major.
const CHROMA_Q: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99, //
    18, 21, 26, 66, 99, 99, 99, 99, //
    24, 26, 56, 99, 99, 99, 99, 99, //
    47, 66, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99, //
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Scales a base table by the libjpeg quality rule, clamping entries
/// to [1, 255]. Quality 100 yields an all-ones table.
fn scaled_table(base: &[u16; 64], quality: u8) -> [f64; 64] {
    let q = quality as i64;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0.0; 64];
    for (slot, &b) in out.iter_mut().zip(base.iter()) {
        let v = (i64::from(b) * scale + 50) / 100;
        *slot = v.clamp(1, 255) as f64;
    }
    out
}

/// A single plane at the codec's level-shifted 0-centered 255 scale.
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Box-downsamples by 2 in both directions, averaging the available
    /// samples in each cell (edge cells of odd planes hold fewer).
    fn downsample2(&self) -> Plane {
        let w = self.w.div_ceil(2);
        let h = self.h.div_ceil(2);
        let mut data = vec![0.0; w * h];
        for cy in 0..h {
            for cx in 0..w {
                let mut acc = 0.0;
                let mut n = 0usize;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let (x, y) = (2 * cx + dx, 2 * cy + dy);
                        if x < self.w && y < self.h {
                            acc += self.data[y * self.w + x];
                            n += 1;
                        }
                    }
                }
                data[cy * w + cx] = acc / n as f64;
            }
        }
        Plane { w, h, data }
    }

    /// Nearest-neighbor upsample back to the given full resolution.
    fn upsample2(&self, w: usize, h: usize) -> Plane {
        let mut data = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                data[y * w + x] = self.data[(y / 2) * self.w + x / 2];
            }
        }
        Plane { w, h, data }
    }

    /// Quantizes every 8x8 block in the DCT domain and reconstructs.
    /// The plane is padded to block multiples by edge replication.
    fn quantize_blocks(&mut self, table: &[f64; 64]) -> Result<()> {
        let bw = self.w.div_ceil(BLOCK) * BLOCK;
        let bh = self.h.div_ceil(BLOCK) * BLOCK;
        let mut padded = vec![0.0; bw * bh];
        for y in 0..bh {
            for x in 0..bw {
                let sx = x.min(self.w - 1);
                let sy = y.min(self.h - 1);
                padded[y * bw + x] = self.data[sy * self.w + sx];
            }
        }
        let mut block = [0.0; BLOCK * BLOCK];
        for by in (0..bh).step_by(BLOCK) {
            for bx in (0..bw).step_by(BLOCK) {
                for y in 0..BLOCK {
                    for x in 0..BLOCK {
                        block[y * BLOCK + x] = padded[(by + y) * bw + bx + x];
                    }
                }
                let mut coefs = dct2_block(&block)?;
                for (c, &q) in coefs.iter_mut().zip(table.iter()) {
                    *c = (*c / q).round() * q;
                }
                let pixels = idct2_block(&coefs)?;
                for y in 0..BLOCK {
                    for x in 0..BLOCK {
                        padded[(by + y) * bw + bx + x] = pixels[y * BLOCK + x];
                    }
                }
            }
        }
        for y in 0..self.h {
            for x in 0..self.w {
                self.data[y * self.w + x] = padded[y * bw + x];
            }
        }
        Ok(())
    }
}

/// Runs the image through the in-memory baseline-JPEG distortion model.
pub fn jpeg_roundtrip(img: &ImageBuf, quality: u8) -> Result<ImageBuf> {
    if img.colorspace() != Colorspace::Rgb {
        return Err(Error::ColorspaceMismatch {
            expected: Colorspace::Rgb.to_string(),
            got: img.colorspace().to_string(),
        });
    }
    if !(1..=100).contains(&quality) {
        return Err(Error::Domain(format!("JPEG quality must lie in [1, 100], got {quality}")));
    }
    let (w, h) = (img.width(), img.height());
    let n = w * h;
    let mut y = Plane { w, h, data: vec![0.0; n] };
    let mut cb = Plane { w, h, data: vec![0.0; n] };
    let mut cr = Plane { w, h, data: vec![0.0; n] };
    let (rp, gp, bp) = (img.plane(0), img.plane(1), img.plane(2));
    for i in 0..n {
        let (r, g, b) = (rp[i], gp[i], bp[i]);
        // Full-range YCbCr at 0..255 with the codec's -128 level shift; the
        // chroma channels are already centered, so the shift cancels there.
        y.data[i] = 255.0 * (0.299 * r + 0.587 * g + 0.114 * b) - 128.0;
        cb.data[i] = 255.0 * (-0.168_736 * r - 0.331_264 * g + 0.5 * b);
        cr.data[i] = 255.0 * (0.5 * r - 0.418_688 * g - 0.081_312 * b);
    }

    let luma_table = scaled_table(&LUMA_Q, quality);
    let chroma_table = scaled_table(&CHROMA_Q, quality);
    y.quantize_blocks(&luma_table)?;
    let mut cb_ds = cb.downsample2();
    let mut cr_ds = cr.downsample2();
    cb_ds.quantize_blocks(&chroma_table)?;
    cr_ds.quantize_blocks(&chroma_table)?;
    let cb = cb_ds.upsample2(w, h);
    let cr = cr_ds.upsample2(w, h);

    let mut out = img.clone();
    {
        let (head, tail) = out.samples_mut().split_at_mut(n);
        let (mid, last) = tail.split_at_mut(n);
        for i in 0..n {
            let yy = (y.data[i] + 128.0) / 255.0;
            let cbb = cb.data[i] / 255.0;
            let crr = cr.data[i] / 255.0;
            head[i] = yy + 1.402 * crr;
            mid[i] = yy - 0.344_136 * cbb - 0.714_136 * crr;
            last[i] = yy + 1.772 * cbb;
        }
    }
    out.clamp_unit();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::psnr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Smooth multi-tone image: block DCT keeps most energy in low
    /// coefficients, the regime the codec is designed for.
    fn natural_image(w: usize, h: usize) -> ImageBuf {
        let mut img = ImageBuf::filled(w, h, Colorspace::Rgb, 0.0).unwrap();
        for y in 0..h {
            for x in 0..w {
                let (fx, fy) = (x as f64 / w as f64, y as f64 / h as f64);
                let base = 0.5 + 0.3 * (2.0 * std::f64::consts::PI * fx).sin() * (3.1 * fy).cos();
                img.set(0, x, y, (base + 0.1 * fy).clamp(0.0, 1.0));
                img.set(1, x, y, base.clamp(0.0, 1.0));
                img.set(2, x, y, (base - 0.15 * fx).clamp(0.0, 1.0));
            }
        }
        img
    }

    #[test]
    fn quality_scaling_matches_reference_rule() {
        // quality 50 keeps the base table exactly.
        let t = scaled_table(&LUMA_Q, 50);
        assert_eq!(t[0], 16.0);
        assert_eq!(t[63], 99.0);
        // quality 100 collapses to all ones.
        assert!(scaled_table(&LUMA_Q, 100).iter().all(|&q| q == 1.0));
        assert!(scaled_table(&CHROMA_Q, 100).iter().all(|&q| q == 1.0));
        // quality 25 doubles the base table.
        let t = scaled_table(&LUMA_Q, 25);
        assert_eq!(t[0], 32.0);
        // Low qualities clamp at 255.
        let t = scaled_table(&CHROMA_Q, 5);
        assert_eq!(t[63], 255.0);
    }

    #[test]
    fn quality_100_is_near_lossless() {
        let img = natural_image(64, 64);
        let out = jpeg_roundtrip(&img, 100).unwrap();
        assert!(psnr(&img, &out).unwrap() >= 45.0);
    }

    #[test]
    fn quality_ladder_monotone_on_smooth_image() {
        let img = natural_image(64, 64);
        let mut prev = f64::INFINITY;
        for q in [80u8, 60, 40, 25, 15] {
            let p = psnr(&img, &jpeg_roundtrip(&img, q).unwrap()).unwrap();
            assert!(p <= prev + 1e-9, "psnr rose from {prev} to {p} at quality {q}");
            prev = p;
        }
        assert!(prev < 45.0, "severe quality should visibly distort");
    }

    #[test]
    fn second_pass_changes_psnr_by_less_than_1db() {
        let img = natural_image(64, 64);
        for q in [80u8, 40] {
            let once = jpeg_roundtrip(&img, q).unwrap();
            let twice = jpeg_roundtrip(&once, q).unwrap();
            let p1 = psnr(&img, &once).unwrap();
            let p2 = psnr(&img, &twice).unwrap();
            assert!((p1 - p2).abs() < 1.0, "q={q}: {p1} vs {p2}");
        }
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = ImageBuf::filled(40, 24, Colorspace::Rgb, 0.37).unwrap();
        for q in [100u8, 80, 60, 40, 25, 15] {
            let out = jpeg_roundtrip(&img, q).unwrap();
            for c in 0..3 {
                let plane = out.plane(c);
                let first = plane[0];
                assert!(
                    plane.iter().all(|&v| (v - first).abs() < 1e-9),
                    "plane {c} not constant at quality {q}"
                );
            }
            // Color drift is bounded by the DC quantization step: at most
            // table[0]/2 in the DC coefficient, i.e. table[0]/16 of a level,
            // across luma plus both chroma contributions.
            let luma_dc = scaled_table(&LUMA_Q, q)[0];
            let chroma_dc = scaled_table(&CHROMA_Q, q)[0];
            let bound = (luma_dc / 16.0 + 1.772 * (chroma_dc / 16.0) * 2.0) / 255.0;
            for c in 0..3 {
                let err = (out.plane(c)[0] - 0.37).abs();
                assert!(err <= bound, "plane {c} drifted {err} > {bound} at quality {q}");
            }
        }
        // Near-unity tables keep the color to within one 8-bit level.
        let out = jpeg_roundtrip(&img, 100).unwrap();
        for c in 0..3 {
            assert!((out.plane(c)[0] - 0.37).abs() <= 1.0 / 255.0);
        }
    }

    #[test]
    fn odd_dimensions_are_handled() {
        let img = natural_image(37, 23);
        let out = jpeg_roundtrip(&img, 60).unwrap();
        assert_eq!(out.width(), 37);
        assert_eq!(out.height(), 23);
        assert!(out.samples().iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
    }

    #[test]
    fn grayscale_content_survives_chroma_path() {
        // Equal channels mean zero chroma; quantizing zeros is exact, so the
        // only distortion is luma quantization.
        let mut img = ImageBuf::filled(32, 32, Colorspace::Rgb, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for y in 0..32 {
            for x in 0..32 {
                let v: f64 = 0.2 + 0.6 * rng.random::<f64>();
                for c in 0..3 {
                    img.set(c, x, y, v);
                }
            }
        }
        let out = jpeg_roundtrip(&img, 80).unwrap();
        for i in 0..img.plane(0).len() {
            let (r, g, b) = (out.plane(0)[i], out.plane(1)[i], out.plane(2)[i]);
            assert!((r - g).abs() < 1e-9 && (g - b).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_quality_rejected() {
        let img = natural_image(16, 16);
        assert!(jpeg_roundtrip(&img, 0).is_err());
        assert!(jpeg_roundtrip(&img, 101).is_err());
    }
}
