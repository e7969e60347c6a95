//! Blind frequency-band image watermarking and robustness benchmarking.
//!
//! The crate provides:
//! - planar float image buffers with PNG/PPM I/O, BT.601 conversion,
//!   bilinear resampling, and PSNR/SSIM quality metrics ([`image`]),
//! - 2-D spectral machinery: FFT, single-level Haar DWT, 8x8 DCT, small
//!   SVD, radial band masks, and ring test patterns ([`spectral`]),
//! - a 13-kind surrogate distortion suite with declared severity ladders
//!   ([`attacks`]),
//! - three blind multi-bit watermarking schemes with a resolution-scaling
//!   wrapper ([`watermark`]),
//! - closed-form detection statistics from the binomial bit-matching model
//!   ([`stats`]),
//! - a deterministic benchmark and frequency-retention harness with JSON,
//!   CSV, and heatmap reporting ([`bench`]).

pub mod attacks;
pub mod bench;
pub mod cli;
pub mod error;
pub mod image;
pub mod spectral;
pub mod stats;
pub mod watermark;

pub use error::{Error, Result};
