//! Spectral difference maps: per-channel magnitude of the bin-wise
//! difference between two images' spectra, plus rendering helpers.

use super::{fft2, Error, Result};
use crate::image::ImageBuf;

/// Real-valued magnitude map over the DFT grid, planar per channel,
/// DC at bin (0, 0).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MagnitudeMap {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl MagnitudeMap {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch(format!(
                "magnitude map length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(MagnitudeMap { width, height, channels, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Averages all channels into a single-channel map.
    pub fn mean_over_channels(&self) -> MagnitudeMap {
        let n = self.width * self.height;
        let mut out = vec![0.0; n];
        for c in 0..self.channels {
            for (o, v) in out.iter_mut().zip(self.plane(c)) {
                *o += v;
            }
        }
        let inv = 1.0 / self.channels as f64;
        for o in &mut out {
            *o *= inv;
        }
        MagnitudeMap { width: self.width, height: self.height, channels: 1, data: out }
    }

    /// Rendering input: log1p of one channel with DC shifted to the center
    /// of the raster, row-major.
    pub fn log_shifted(&self, c: usize) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        let src = self.plane(c);
        let mut out = vec![0.0; w * h];
        for v in 0..h {
            for u in 0..w {
                // Destination (u', v') centers DC at (w/2, h/2).
                let du = (u + w / 2) % w;
                let dv = (v + h / 2) % h;
                out[dv * w + du] = src[v * w + u].ln_1p();
            }
        }
        out
    }
}

/// Magnitude of the spectral difference |F(a) - F(b)| per channel.
pub fn spectral_diff(a: &ImageBuf, b: &ImageBuf) -> Result<MagnitudeMap> {
    if a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels() {
        return Err(Error::ShapeMismatch(format!(
            "spectral_diff inputs differ: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let sa = fft2(a);
    let sb = fft2(b);
    let n = a.width() * a.height();
    let mut data = Vec::with_capacity(n * a.channels());
    for c in 0..a.channels() {
        for (x, y) in sa.bins(c).iter().zip(sb.bins(c)) {
            data.push((x - y).norm());
        }
    }
    MagnitudeMap::new(a.width(), a.height(), a.channels(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Colorspace;
    use crate::spectral::{ifft2, ring_pattern, BandName};

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
    fn identical_images_have_zero_map() {
        let a = pseudo_image(16, 16, 2);
        let d = spectral_diff(&a, &a).unwrap();
        assert!(d.plane(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diff_is_symmetric_in_its_arguments() {
        let a = pseudo_image(16, 12, 3);
        let b = pseudo_image(16, 12, 4);
        let ab = spectral_diff(&a, &b).unwrap();
        let ba = spectral_diff(&b, &a).unwrap();
        for (x, y) in ab.plane(0).iter().zip(ba.plane(0)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn added_ring_pattern_is_recovered_exactly() {
        let a = pseudo_image(64, 64, 9);
        let ring = ring_pattern(64, 64, &BandName::Mid.spec(), 4.0).unwrap();
        let pattern_px = ifft2(&ring.to_spectrum()).unwrap();
        let mut b = a.clone();
        for (dst, p) in b.samples_mut().iter_mut().zip(pattern_px.samples()) {
            *dst += p;
        }
        let d = spectral_diff(&b, &a).unwrap();
        for v in 0..64 {
            for u in 0..64 {
                let want = ring.value(u, v);
                let got = d.plane(0)[v * 64 + u];
                assert!((got - want).abs() < 1e-4, "bin ({u},{v}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn log_shifted_centers_dc() {
        let a = pseudo_image(8, 8, 5);
        let mut b = a.clone();
        // Constant offset: the difference is pure DC.
        for v in b.samples_mut() {
            *v += 0.125;
        }
        let d = spectral_diff(&a, &b).unwrap();
        let shifted = d.log_shifted(0);
        let dc = (0.125f64 * 64.0).ln_1p();
        assert!((shifted[4 * 8 + 4] - dc).abs() < 1e-9);
        assert!(shifted[0].abs() < 1e-9);
    }

    #[test]
    fn mean_over_channels_averages() {
        let mut map = MagnitudeMap::new(2, 2, 3, vec![0.0; 12]).unwrap();
        map.plane_mut(0).fill(1.0);
        map.plane_mut(1).fill(2.0);
        map.plane_mut(2).fill(6.0);
        let mean = map.mean_over_channels();
        assert!(mean.plane(0).iter().all(|&v| (v - 3.0).abs() < 1e-12));
    }
}
