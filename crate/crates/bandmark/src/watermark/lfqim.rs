//! Lattice QIM embedder on low-frequency Fourier magnitudes.
//!
//! Each payload bit owns a keyed, disjoint set of bins inside the carrier
//! annulus of the luma spectrum. A bin's magnitude moves to the nearest
//! point of a step-delta lattice, offset by half a step when the bit is
//! one; phase is untouched and the conjugate bin mirrors the change so the
//! inverse transform stays real.
//!
//! Extraction re-estimates a per-ring multiplicative gain before the
//! lattice decision. A linear filter multiplies the spectrum by a smooth,
//! roughly radial transfer function, so magnitudes in a narrow ring share
//! one unknown gain, and aligning them back onto the lattice recovers it.
//! The admissible gain range is floored well above what a strong blur
//! leaves of high-frequency bands, so carriers placed there are
//! deliberately unrecoverable once attenuated.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BitMessage, WatermarkKey};
use crate::error::{Error, Result};
use crate::image::{from_yuv, to_yuv, ImageBuf};
use crate::spectral::{fft2, ifft2, radius_fraction};

/// Lowest admissible compensation gain. Attenuation below this level is
/// treated as destroyed signal rather than compensated away.
const GAIN_FLOOR: f64 = 0.35;
/// Highest admissible compensation gain (brightness or contrast can push
/// magnitudes above their embedded level).
const GAIN_CEIL: f64 = 1.8;
/// Bins decode against the half-step lattice only while the locked-phase
/// residual stays under this fraction of a half step during refinement.
const LOCK_WINDOW: f64 = 0.32;

/// Keyed carrier: which half-plane bins carry which payload bit.
#[derive(Debug)]
pub(crate) struct Carrier {
    /// Bin coordinates, length `k * m`; bit `i` owns the slice
    /// `bins[i * m..(i + 1) * m]`.
    bins: Vec<(usize, usize)>,
    m: usize,
    /// Lattice step in raw spectrum units (`delta * width * height`).
    delta_eff: f64,
}

/// Enumerates the annulus bins of the non-redundant spectrum half, keyed
/// by the shuffle seed, and assigns `m` of them to each payload bit.
///
/// A bin is kept when it lies in `[r_low, r_high)` and is not its own
/// conjugate (self-conjugate bins must stay real and cannot hold an
/// arbitrary magnitude change). One representative per conjugate pair is
/// stored; the mirror bin is updated implicitly at embed time.
pub(crate) fn build_carrier(key: &WatermarkKey, width: usize, height: usize) -> Result<Carrier> {
    let mut candidates = Vec::new();
    for v in 0..height {
        for u in 0..width {
            let cu = (width - u) % width;
            let cv = (height - v) % height;
            let idx = v * width + u;
            let conj_idx = cv * width + cu;
            if idx >= conj_idx {
                continue;
            }
            let r = radius_fraction(u, v, width, height);
            if r >= key.r_low && r < key.r_high {
                candidates.push((u, v));
            }
        }
    }
    let needed = key.k * key.m;
    if candidates.len() < needed {
        return Err(Error::Capacity { needed, available: candidates.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(key.seed);
    candidates.shuffle(&mut rng);
    candidates.truncate(needed);
    Ok(Carrier { bins: candidates, m: key.m, delta_eff: key.delta * (width * height) as f64 })
}

fn check_resolution(img: &ImageBuf, key: &WatermarkKey) -> Result<()> {
    if [img.width(), img.height()] != key.native {
        return Err(Error::ShapeMismatch(format!(
            "image is {}x{} but the key embeds at {}x{}",
            img.width(),
            img.height(),
            key.native[0],
            key.native[1]
        )));
    }
    Ok(())
}

/// Nearest lattice point of the parity class selected by `bit`.
///
/// Bit zero uses multiples of `delta`, bit one the half-step offsets, and
/// the result never goes negative (magnitudes cannot).
fn lattice_project(mag: f64, bit: bool, delta: f64) -> f64 {
    if bit {
        let n = (mag / delta - 0.5).round().max(0.0);
        (n + 0.5) * delta
    } else {
        (mag / delta).round().max(0.0) * delta
    }
}

/// Embeds `msg` into the luma spectrum of `img` under `key`.
pub fn embed(img: &ImageBuf, msg: &BitMessage, key: &WatermarkKey) -> Result<ImageBuf> {
    key.validate()?;
    check_resolution(img, key)?;
    if msg.len() != key.k {
        return Err(Error::BadMessage(format!(
            "message holds {} bits but the key expects {}",
            msg.len(),
            key.k
        )));
    }
    let (w, h) = (img.width(), img.height());
    let carrier = build_carrier(key, w, h)?;

    let mut yuv = to_yuv(img)?;
    let y = yuv.extract_plane(0)?;
    let mut spec = fft2(&y);
    let bins = spec.bins_mut(0);
    for (i, &bit) in msg.bits().iter().enumerate() {
        for &(u, v) in &carrier.bins[i * key.m..(i + 1) * key.m] {
            let idx = v * w + u;
            let z = bins[idx];
            let mag = z.norm();
            let target = lattice_project(mag, bit, carrier.delta_eff);
            let zt = if mag > f64::MIN_POSITIVE {
                z * (target / mag)
            } else {
                Complex::new(target, 0.0)
            };
            bins[idx] = zt;
            let conj_idx = ((h - v) % h) * w + ((w - u) % w);
            bins[conj_idx] = zt.conj();
        }
    }
    let y_marked = ifft2(&spec)?;
    yuv.replace_plane(0, &y_marked)?;
    let mut out = from_yuv(&yuv)?;
    out.clamp_unit();
    Ok(out)
}

/// Weighted lattice alignment of `mags` under candidate gain `g`.
///
/// Short magnitudes dominate: their alignment peak is wide in `g`, which
/// is what the coarse search needs. Long magnitudes are recovered later by
/// local refinement.
fn coarse_alignment(mags: &[f64], half: f64, g: f64) -> f64 {
    let mut acc = 0.0;
    let mut wsum = 0.0;
    for &m in mags {
        let u = m / (g * half);
        let w = 1.0 / (1.0 + (u / 12.0).powi(2));
        acc += w * (std::f64::consts::TAU * u).cos();
        wsum += w;
    }
    acc / wsum
}

/// Estimates the common gain of one ring of magnitudes.
///
/// A coarse log-spaced sweep finds the alignment peak; among candidates
/// within 15 percent of the best score the largest gain wins, because
/// every integer fraction of the true gain aligns equally well but decodes
/// every bit as zero. Locked least-squares refinement then pulls the
/// estimate tight enough for long magnitudes, whose parity is sensitive to
/// sub-percent gain error. `prior` narrows the sweep to the neighborhood
/// of the previous ring, keeping the profile radially smooth.
fn estimate_ring_gain(mags: &[f64], half: f64, prior: Option<f64>) -> f64 {
    let (lo, hi) = match prior {
        Some(p) => ((0.55 * p).max(GAIN_FLOOR), (1.35 * p).min(GAIN_CEIL)),
        None => (GAIN_FLOOR, GAIN_CEIL),
    };
    let mut med: Vec<f64> = mags.to_vec();
    med.sort_by(|a, b| a.total_cmp(b));
    let u_med = (med[med.len() / 2] / half).max(4.0);
    let step = (0.25 / u_med).min(0.02);
    let points = ((hi / lo).ln() / step).ceil().clamp(40.0, 6000.0) as usize;

    let mut best = f64::NEG_INFINITY;
    let mut scores = Vec::with_capacity(points + 1);
    for i in 0..=points {
        let g = lo * (hi / lo).powf(i as f64 / points as f64);
        let a = coarse_alignment(mags, half, g);
        scores.push((g, a));
        if a > best {
            best = a;
        }
    }
    let mut g = prior.unwrap_or(1.0).clamp(lo, hi);
    if best > 0.12 {
        let cut = (0.85 * best).max(0.12);
        let top = scores
            .iter()
            .filter(|&&(_, a)| a >= cut)
            .map(|&(gc, _)| gc)
            .fold(f64::NEG_INFINITY, f64::max);
        if top.is_finite() {
            g = top;
        }
    }

    for _ in 0..10 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &m in mags {
            let u = m / (g * half);
            let n = u.round();
            if n >= 1.0 && (u - n).abs() < LOCK_WINDOW {
                num += (u - n) * u;
                den += u * u;
            }
        }
        if den < 1.0 {
            break;
        }
        let s = num / den;
        g *= 1.0 + s;
        if s.abs() < 1e-9 {
            break;
        }
    }
    g.clamp(GAIN_FLOOR, GAIN_CEIL)
}

/// Decoded payload with per-bit confidence.
#[derive(Debug, Clone)]
pub struct Extraction {
    /// The decoded bits, one per payload position.
    pub message: BitMessage,
    /// Mean signed lattice margin per bit, oriented toward the decoded
    /// bit: near 1.0 means every carrier sat on its decoded parity class,
    /// near 0.0 means the votes were balanced.
    pub scores: Vec<f64>,
}

/// Decodes the payload from the luma spectrum of `img` under `key`.
pub fn extract(img: &ImageBuf, key: &WatermarkKey) -> Result<Extraction> {
    key.validate()?;
    check_resolution(img, key)?;
    let (w, h) = (img.width(), img.height());
    let carrier = build_carrier(key, w, h)?;
    let half = carrier.delta_eff / 2.0;

    let yuv = to_yuv(img)?;
    let y = yuv.extract_plane(0)?;
    let spec = fft2(&y);
    let bins = spec.bins(0);

    let total = carrier.bins.len();
    let mags: Vec<f64> = carrier.bins.iter().map(|&(u, v)| bins[v * w + u].norm()).collect();
    let radii: Vec<f64> =
        carrier.bins.iter().map(|&(u, v)| radius_fraction(u, v, w, h)).collect();

    // Ring partition: bins sorted by radius, split into equal-count rings,
    // each ring solved for one gain from the inside out.
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let rings = (total / 64).clamp(1, 16);
    let mut gain = vec![0.0; total];
    let mut prior = None;
    for ring in 0..rings {
        let lo = ring * total / rings;
        let hi = (ring + 1) * total / rings;
        let ring_mags: Vec<f64> = order[lo..hi].iter().map(|&b| mags[b]).collect();
        let g = estimate_ring_gain(&ring_mags, half, prior);
        for &b in &order[lo..hi] {
            gain[b] = g;
        }
        prior = Some(g);
    }

    let mut decoded = Vec::with_capacity(key.k);
    let mut scores = Vec::with_capacity(key.k);
    for i in 0..key.k {
        let mut votes_one = 0usize;
        let mut margin_sum = 0.0;
        for b in i * carrier.m..(i + 1) * carrier.m {
            let u = mags[b] / (gain[b] * half);
            let d_even = (u - 2.0 * (u / 2.0).round()).abs();
            let d_odd = (u - (2.0 * ((u - 1.0) / 2.0).round() + 1.0)).abs();
            if d_odd < d_even {
                votes_one += 1;
            }
            margin_sum += d_even - d_odd;
        }
        let bit = 2 * votes_one > carrier.m;
        let raw = margin_sum / carrier.m as f64;
        decoded.push(bit);
        scores.push(if bit { raw } else { -raw });
    }
    Ok(Extraction { message: BitMessage::from_bits(decoded)?, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::watermark::MethodId;
    use rand::Rng;

    fn test_image(w: usize, h: usize, seed: u64) -> ImageBuf {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut img = ImageBuf::filled(w, h, crate::image::Colorspace::Rgb, 0.0).unwrap();
        for c in 0..3 {
            for y in 0..h {
                for x in 0..w {
                    let fx = x as f64 / w as f64;
                    let fy = y as f64 / h as f64;
                    let base = 0.5
                        + 0.2 * (std::f64::consts::TAU * (2.0 + c as f64) * fx).sin()
                        + 0.15 * (std::f64::consts::TAU * 3.0 * fy).cos();
                    let noise = 0.05 * (rng.random::<f64>() - 0.5);
                    img.set(c, x, y, (base + noise).clamp(0.02, 0.98));
                }
            }
        }
        img
    }

    #[test]
    fn carrier_is_disjoint_and_keyed() {
        let key = WatermarkKey::new(MethodId::Lfqim, 7);
        let carrier = build_carrier(&key, 256, 256).unwrap();
        assert_eq!(carrier.bins.len(), key.k * key.m);
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &carrier.bins {
            assert!(seen.insert((u, v)), "bin ({u}, {v}) assigned twice");
            let cu = (256 - u) % 256;
            let cv = (256 - v) % 256;
            assert!(
                !seen.contains(&(cu, cv)),
                "bin ({u}, {v}) and its conjugate both assigned"
            );
            let r = radius_fraction(u, v, 256, 256);
            assert!(r >= key.r_low && r < key.r_high);
        }
        let other = build_carrier(&WatermarkKey::new(MethodId::Lfqim, 8), 256, 256).unwrap();
        assert_ne!(carrier.bins, other.bins);
        let again = build_carrier(&key, 256, 256).unwrap();
        assert_eq!(carrier.bins, again.bins);
    }

    #[test]
    fn capacity_error_when_annulus_too_small() {
        let key = WatermarkKey::new(MethodId::Lfqim, 1);
        let err = build_carrier(&key, 32, 32).unwrap_err();
        match err {
            Error::Capacity { needed, available } => {
                assert_eq!(needed, 900);
                assert!(available < needed);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn lattice_projection_parity_and_distance() {
        let delta = 10.0;
        assert_eq!(lattice_project(22.0, false, delta), 20.0);
        assert_eq!(lattice_project(22.0, true, delta), 25.0);
        assert_eq!(lattice_project(0.0, false, delta), 0.0);
        assert_eq!(lattice_project(0.0, true, delta), 5.0);
        assert_eq!(lattice_project(2.4, true, delta), 5.0);
        for i in 0..200 {
            let m = i as f64 * 0.37;
            for bit in [false, true] {
                let p = lattice_project(m, bit, delta);
                assert!(p >= 0.0);
                let steps = p / (delta / 2.0);
                assert!((steps - steps.round()).abs() < 1e-9);
                assert_eq!(steps.round() as i64 % 2 != 0, bit);
                assert!((p - m).abs() <= delta / 2.0 + 1e-9 || m < delta / 2.0);
            }
        }
    }

    #[test]
    fn roundtrip_is_exact_with_positive_scores() {
        let key = WatermarkKey::new(MethodId::Lfqim, 42);
        let img = test_image(256, 256, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let msg = BitMessage::random(key.k, &mut rng).unwrap();
        let marked = embed(&img, &msg, &key).unwrap();
        let got = extract(&marked, &key).unwrap();
        assert_eq!(got.message, msg);
        for (i, &s) in got.scores.iter().enumerate() {
            assert!(s > 0.5, "bit {i} score {s} too weak");
        }
    }

    #[test]
    fn embedding_stays_imperceptible() {
        let key = WatermarkKey::new(MethodId::Lfqim, 42);
        let img = test_image(256, 256, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let msg = BitMessage::random(key.k, &mut rng).unwrap();
        let marked = embed(&img, &msg, &key).unwrap();
        let q = crate::image::psnr(&img, &marked).unwrap();
        assert!(q >= 38.0, "psnr {q} below design target");
    }

    #[test]
    fn all_black_input_is_handled() {
        let key = WatermarkKey::new(MethodId::Lfqim, 9);
        let img = ImageBuf::filled(256, 256, crate::image::Colorspace::Rgb, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let msg = BitMessage::random(key.k, &mut rng).unwrap();
        let marked = embed(&img, &msg, &key).unwrap();
        for &s in marked.samples() {
            assert!((0.0..=1.0).contains(&s));
        }
        let got = extract(&marked, &key).unwrap();
        assert_eq!(got.message.len(), key.k);
    }

    #[test]
    fn wrong_resolution_and_length_are_rejected() {
        let key = WatermarkKey::new(MethodId::Lfqim, 1);
        let img = test_image(128, 128, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let msg = BitMessage::random(key.k, &mut rng).unwrap();
        assert!(matches!(embed(&img, &msg, &key), Err(Error::ShapeMismatch(_))));
        assert!(matches!(extract(&img, &key), Err(Error::ShapeMismatch(_))));
        let short = BitMessage::random(10, &mut rng).unwrap();
        let native = test_image(256, 256, 2);
        assert!(matches!(embed(&native, &short, &key), Err(Error::BadMessage(_))));
    }

    #[test]
    fn wrong_seed_decodes_near_chance() {
        let key = WatermarkKey::new(MethodId::Lfqim, 1000);
        let img = test_image(256, 256, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let msg = BitMessage::random(key.k, &mut rng).unwrap();
        let marked = embed(&img, &msg, &key).unwrap();
        let mut accs = Vec::new();
        for trial in 0..20u64 {
            let wrong = WatermarkKey::new(MethodId::Lfqim, 2000 + trial);
            let got = extract(&marked, &wrong).unwrap();
            let matches = got
                .message
                .bits()
                .iter()
                .zip(msg.bits())
                .filter(|(a, b)| a == b)
                .count();
            accs.push(matches as f64 / key.k as f64);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((0.4..=0.6).contains(&mean), "wrong-key mean accuracy {mean}");
    }
}
