//! 2-D spectral machinery: FFT, Haar DWT, 8x8 DCT, small-matrix SVD,
//! radial frequency bands, ring test patterns, and spectral difference maps.
//!
//! FFT convention: the forward transform is unnormalized, the inverse
//! scales by 1/(W*H), matching the usual DFT pair. DC sits at bin (0, 0);
//! real images therefore produce conjugate-symmetric spectra with
//! S(u, v) = conj(S((W-u) mod W, (H-v) mod H)).

mod bands;
mod dct;
mod diff;
mod dwt;
mod svd;

pub use bands::{band_energy, band_mask, radius_fraction, ring_pattern, BandName, BandSpec, RingPattern};
pub use dct::{dct2_block, idct2_block, BLOCK};
pub use diff::{spectral_diff, MagnitudeMap};
pub use dwt::{haar_dwt2, haar_idwt2, DwtBands};
pub use svd::{svd_reconstruct, svd_small};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rustfft::Fft;

use crate::error::{Error, Result};
use crate::image::{Colorspace, ImageBuf};

/// Largest imaginary residual tolerated when realizing an inverse transform.
pub const HERMITIAN_TOLERANCE: f64 = 1e-6;

/// Complex 2-D spectrum, planar per channel, DC at bin (0, 0).
#[derive(Debug, Clone)]
pub struct Spectrum {
    width: usize,
    height: usize,
    colorspace: Colorspace,
    data: Vec<Complex<f64>>,
}

impl Spectrum {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.colorspace.channels()
    }

    pub fn colorspace(&self) -> Colorspace {
        self.colorspace
    }

    fn plane_len(&self) -> usize {
        self.width * self.height
    }

    /// Channel `c` bins, row-major over (u, v) with u fastest.
    pub fn bins(&self, c: usize) -> &[Complex<f64>] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn bins_mut(&mut self, c: usize) -> &mut [Complex<f64>] {
        let n = self.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Builds an all-zero spectrum (used by synthetic pattern tests).
    pub fn zero(width: usize, height: usize, colorspace: Colorspace) -> Self {
        Spectrum {
            width,
            height,
            colorspace,
            data: vec![Complex::new(0.0, 0.0); width * height * colorspace.channels()],
        }
    }
}

type PlanKey = (usize, bool);

fn plan_for(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = rustfft::FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place 2-D FFT over one plane: rows, then columns.
fn fft2_plane(plane: &mut [Complex<f64>], w: usize, h: usize, inverse: bool) {
    let row_fft = plan_for(w, inverse);
    for row in plane.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = plan_for(h, inverse);
    let mut col = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = plane[y * w + x];
        }
        col_fft.process(&mut col);
        for y in 0..h {
            plane[y * w + x] = col[y];
        }
    }
}

/// Forward 2-D FFT of every channel. Unnormalized: a constant image c maps
/// to a DC bin of c*W*H.
pub fn fft2(img: &ImageBuf) -> Spectrum {
    let (w, h) = (img.width(), img.height());
    let mut data = Vec::with_capacity(img.samples().len());
    for c in 0..img.channels() {
        let mut plane: Vec<Complex<f64>> =
            img.plane(c).iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft2_plane(&mut plane, w, h, false);
        data.extend_from_slice(&plane);
    }
    Spectrum { width: w, height: h, colorspace: img.colorspace(), data }
}

/// Inverse 2-D FFT, scaled by 1/(W*H), realized to a float image.
///
/// The spectrum must be conjugate-symmetric: if any sample's imaginary
/// part exceeds [`HERMITIAN_TOLERANCE`] after scaling, the call fails
/// instead of silently discarding structure.
pub fn ifft2(spec: &Spectrum) -> Result<ImageBuf> {
    let (w, h) = (spec.width, spec.height);
    let norm = 1.0 / (w * h) as f64;
    let mut out = Vec::with_capacity(spec.data.len());
    let mut worst = 0.0f64;
    for c in 0..spec.channels() {
        let mut plane = spec.bins(c).to_vec();
        fft2_plane(&mut plane, w, h, true);
        for v in &plane {
            let im = (v.im * norm).abs();
            if im > worst {
                worst = im;
            }
            out.push(v.re * norm);
        }
    }
    if worst > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { residual: worst, tolerance: HERMITIAN_TOLERANCE });
    }
    ImageBuf::from_planar(w, h, spec.colorspace, out)
}
