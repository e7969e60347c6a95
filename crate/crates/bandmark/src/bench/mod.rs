//! Benchmark harness: corpus handling, the frequency-retention pipeline,
//! the method-by-attack evaluation matrix, and report persistence.
//!
//! Everything here is deterministic: every random draw derives from an
//! explicit seed plus the indices of the cell and image consuming it, so
//! reruns with the same corpus and seeds produce byte-identical reports
//! regardless of thread scheduling.

mod analysis;
mod report;
mod runner;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::{load_image, Colorspace, ImageBuf};

pub use analysis::{frequency_analysis, SpectralReport, RETENTION_NORMALIZATION};
pub use report::{
    read_report, render_heatmap, write_report, write_spectral_report, ReportFormat,
    SCHEMA_VERSION,
};
pub use runner::{empirical_detection, run_benchmark, BenchRecord, EmpiricalDetection};

/// A fixed set of same-sized images at 8-bit sample depth.
///
/// Images are stored quantized to the 256-level grid they would occupy in
/// a PNG file, which keeps a 200-image corpus in the hundreds of
/// megabytes range and makes in-memory benchmarks measure the same
/// pipeline as on-disk ones. [`Corpus::image`] materializes floats on
/// demand.
#[derive(Debug)]
pub struct Corpus {
    width: usize,
    height: usize,
    names: Vec<String>,
    planes: Vec<Vec<u8>>,
    hash: String,
}

impl Corpus {
    /// Builds a corpus from float images, quantizing samples to 8 bits.
    pub fn from_images(names: Vec<String>, images: &[ImageBuf]) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::Domain("corpus is empty".into()));
        }
        if names.len() != images.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} images",
                names.len(),
                images.len()
            )));
        }
        let (width, height) = (images[0].width(), images[0].height());
        let mut planes = Vec::with_capacity(images.len());
        for img in images {
            if img.width() != width || img.height() != height {
                return Err(Error::ShapeMismatch(format!(
                    "corpus mixes sizes: {width}x{height} and {}x{}",
                    img.width(),
                    img.height()
                )));
            }
            if img.colorspace() != Colorspace::Rgb {
                return Err(Error::ColorspaceMismatch {
                    expected: Colorspace::Rgb.to_string(),
                    got: img.colorspace().to_string(),
                });
            }
            planes.push(
                img.samples().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect(),
            );
        }
        let hash = hash_planes(width, height, &planes);
        Ok(Corpus { width, height, names, planes, hash })
    }

    /// Loads every `.png` and `.ppm` under `dir`, sorted by file name.
    pub fn load(dir: &std::path::Path) -> Result<Self> {
        let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("png") | Some("ppm")
                )
            })
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::Domain(format!("no corpus images under {}", dir.display())));
        }
        let mut names = Vec::with_capacity(paths.len());
        let mut images = Vec::with_capacity(paths.len());
        for p in &paths {
            images.push(load_image(p)?);
            names.push(p.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string());
        }
        Self::from_images(names, &images)
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// SHA-256 over dimensions and the 8-bit samples of every image.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Materializes image `i` as floats in [0, 1].
    pub fn image(&self, i: usize) -> ImageBuf {
        let data: Vec<f64> = self.planes[i].iter().map(|&b| b as f64 / 255.0).collect();
        ImageBuf::from_planar(self.width, self.height, Colorspace::Rgb, data)
            .expect("stored planes always match corpus dimensions")
    }
}

fn hash_planes(width: usize, height: usize, planes: &[Vec<u8>]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((width as u64).to_le_bytes());
    hasher.update((height as u64).to_le_bytes());
    hasher.update((planes.len() as u64).to_le_bytes());
    for p in planes {
        hasher.update(p);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Generates `n` synthetic photographs: smooth gradients, soft blobs,
/// rectangles with real edges, mild sinusoid texture, and sensor-like
/// noise, clamped away from the value extremes.
pub fn synth_corpus(n: usize, width: usize, height: usize, seed: u64) -> Result<Corpus> {
    use rand::{Rng, SeedableRng};
    if n == 0 {
        return Err(Error::Domain("corpus is empty".into()));
    }
    let mut names = Vec::with_capacity(n);
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, i as u64, 0));
        let mut img = ImageBuf::filled(width, height, Colorspace::Rgb, 0.0)?;

        let grad: Vec<[f64; 4]> = (0..3)
            .map(|_| {
                [
                    0.3 + 0.4 * rng.random::<f64>(),
                    0.5 * (rng.random::<f64>() - 0.5),
                    0.5 * (rng.random::<f64>() - 0.5),
                    0.3 * (rng.random::<f64>() - 0.5),
                ]
            })
            .collect();
        let blob_count = 3 + (rng.random::<u64>() % 5) as usize;
        let blobs: Vec<[f64; 6]> = (0..blob_count)
            .map(|_| {
                [
                    rng.random::<f64>() * width as f64,
                    rng.random::<f64>() * height as f64,
                    (0.05 + 0.25 * rng.random::<f64>()) * width as f64,
                    0.8 * (rng.random::<f64>() - 0.5),
                    0.8 * (rng.random::<f64>() - 0.5),
                    0.8 * (rng.random::<f64>() - 0.5),
                ]
            })
            .collect();
        let rect_count = 1 + (rng.random::<u64>() % 3) as usize;
        let rects: Vec<[f64; 8]> = (0..rect_count)
            .map(|_| {
                let x0 = rng.random::<f64>() * 0.8 * width as f64;
                let y0 = rng.random::<f64>() * 0.8 * height as f64;
                [
                    x0,
                    y0,
                    x0 + (0.05 + 0.3 * rng.random::<f64>()) * width as f64,
                    y0 + (0.05 + 0.3 * rng.random::<f64>()) * height as f64,
                    0.5 * (rng.random::<f64>() - 0.5),
                    0.5 * (rng.random::<f64>() - 0.5),
                    0.5 * (rng.random::<f64>() - 0.5),
                    1.0 + 2.0 * rng.random::<f64>(),
                ]
            })
            .collect();
        let tex: Vec<[f64; 4]> = (0..2)
            .map(|_| {
                [
                    0.02 + 0.13 * rng.random::<f64>(),
                    0.02 + 0.13 * rng.random::<f64>(),
                    std::f64::consts::TAU * rng.random::<f64>(),
                    0.01 + 0.03 * rng.random::<f64>(),
                ]
            })
            .collect();

        for y in 0..height {
            for x in 0..width {
                let fx = x as f64 / width as f64;
                let fy = y as f64 / height as f64;
                let mut px = [0.0f64; 3];
                for (c, g) in grad.iter().enumerate() {
                    px[c] = g[0] + g[1] * fx + g[2] * fy + g[3] * fx * fy;
                }
                for b in &blobs {
                    let d2 = ((x as f64 - b[0]).powi(2) + (y as f64 - b[1]).powi(2)) / (b[2] * b[2]);
                    let gain = (-d2).exp();
                    for c in 0..3 {
                        px[c] += gain * b[3 + c];
                    }
                }
                for r in &rects {
                    let edge = r[7];
                    let inx = soft_step(x as f64 - r[0], edge) * soft_step(r[2] - x as f64, edge);
                    let iny = soft_step(y as f64 - r[1], edge) * soft_step(r[3] - y as f64, edge);
                    let gain = inx * iny;
                    for c in 0..3 {
                        px[c] += gain * r[4 + c];
                    }
                }
                let mut t = 0.0;
                for w in &tex {
                    t += w[3] * (std::f64::consts::TAU * (w[0] * x as f64 + w[1] * y as f64) + w[2]).sin();
                }
                for c in 0..3 {
                    let noise = 0.01 * (rng.random::<f64>() - 0.5);
                    img.set(c, x, y, (px[c] + t + noise).clamp(0.02, 0.98));
                }
            }
        }
        names.push(format!("synth-{i:04}"));
        images.push(img);
    }
    Corpus::from_images(names, &images)
}

/// Smooth 0-to-1 ramp of width `edge` starting at `d = 0`.
fn soft_step(d: f64, edge: f64) -> f64 {
    let t = (d / edge).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Stateless seed mixer: one output stream per (seed, stream, a, b).
pub(crate) fn derive_seed(seed: u64, stream: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z ^= a.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= b.wrapping_mul(0x94d0_49bb_1331_11eb);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Compensated accumulator so aggregate means do not depend on the order
/// contributions arrive in beyond 1e-12.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}
