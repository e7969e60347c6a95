//! Planar float image buffers and the operations the rest of the crate
//! builds on: PNG/PPM I/O, BT.601 color conversion, bilinear resampling,
//! and the PSNR/SSIM/YUV-MSE quality metrics.

mod color;
mod io;
mod metrics;
mod resize;

pub use color::{from_yuv, to_yuv};
pub use io::{load_image, save_image};
pub use metrics::{mse, mse_yuv, psnr, ssim};
pub use resize::resize_bilinear;

use crate::error::{Error, Result};

/// Interpretation of the sample planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Colorspace {
    /// Three planes, red/green/blue, nominal range [0, 1].
    Rgb,
    /// Three planes, BT.601 full-range luma plus signed chroma.
    Yuv,
    /// Single luminance plane, nominal range [0, 1].
    Gray,
}

impl Colorspace {
    pub(crate) fn channels(self) -> usize {
        match self {
            Colorspace::Rgb | Colorspace::Yuv => 3,
            Colorspace::Gray => 1,
        }
    }
}

impl std::fmt::Display for Colorspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Colorspace::Rgb => "RGB",
            Colorspace::Yuv => "YUV",
            Colorspace::Gray => "GRAY",
        };
        f.write_str(name)
    }
}

/// Planar floating-point raster.
///
/// Samples are stored plane by plane, each plane row-major, so
/// `data[c*w*h + y*w + x]` is channel `c` at pixel `(x, y)`. Values are
/// nominally in [0, 1] for RGB/GRAY; YUV chroma planes are signed. All
/// samples are finite; constructors reject NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    colorspace: Colorspace,
    data: Vec<f64>,
}

impl ImageBuf {
    /// Builds a buffer from planar samples, validating shape and finiteness.
    pub fn from_planar(
        width: usize,
        height: usize,
        colorspace: Colorspace,
        data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ShapeMismatch(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width * height * colorspace.channels();
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} {colorspace} needs {expected} samples, got {}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("image samples must be finite".into()));
        }
        Ok(ImageBuf { width, height, colorspace, data })
    }

    /// Constant-valued image, `value` replicated across every plane.
    pub fn filled(width: usize, height: usize, colorspace: Colorspace, value: f64) -> Result<Self> {
        let n = width * height * colorspace.channels();
        Self::from_planar(width, height, colorspace, vec![value; n])
    }

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

    /// Total samples per plane.
    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.plane_len();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// All samples, plane-major.
    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[c * self.plane_len() + y * self.width + x]
    }

    pub fn set(&mut self, c: usize, x: usize, y: usize, v: f64) {
        let n = self.plane_len();
        self.data[c * n + y * self.width + x] = v;
    }

    /// Extracts one plane as a GRAY image.
    pub fn extract_plane(&self, c: usize) -> Result<ImageBuf> {
        if c >= self.channels() {
            return Err(Error::ShapeMismatch(format!(
                "plane {c} out of range for {} channels",
                self.channels()
            )));
        }
        ImageBuf::from_planar(self.width, self.height, Colorspace::Gray, self.plane(c).to_vec())
    }

    /// Replaces one plane; source must be a same-sized GRAY image.
    pub fn replace_plane(&mut self, c: usize, plane: &ImageBuf) -> Result<()> {
        if plane.colorspace != Colorspace::Gray
            || plane.width != self.width
            || plane.height != self.height
        {
            return Err(Error::ShapeMismatch(format!(
                "replacement plane must be {}x{} GRAY, got {}x{} {}",
                self.width, self.height, plane.width, plane.height, plane.colorspace
            )));
        }
        self.plane_mut(c).copy_from_slice(plane.samples());
        Ok(())
    }

    /// Clamps every sample into [0, 1] in place.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    pub(crate) fn same_shape(&self, other: &ImageBuf) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.colorspace.channels() == other.colorspace.channels()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_planar_checks_length() {
        let err = ImageBuf::from_planar(4, 4, Colorspace::Rgb, vec![0.0; 16]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
        assert!(ImageBuf::from_planar(4, 4, Colorspace::Rgb, vec![0.0; 48]).is_ok());
    }

    #[test]
    fn from_planar_rejects_nan() {
        let mut data = vec![0.5; 16];
        data[7] = f64::NAN;
        let err = ImageBuf::from_planar(4, 4, Colorspace::Gray, data).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn plane_views_are_disjoint() {
        let mut img = ImageBuf::filled(2, 2, Colorspace::Rgb, 0.25).unwrap();
        img.plane_mut(1).fill(0.75);
        assert!(img.plane(0).iter().all(|&v| v == 0.25));
        assert!(img.plane(1).iter().all(|&v| v == 0.75));
        assert!(img.plane(2).iter().all(|&v| v == 0.25));
    }

    #[test]
    fn extract_and_replace_plane_roundtrip() {
        let mut img = ImageBuf::filled(3, 2, Colorspace::Rgb, 0.5).unwrap();
        let mut green = img.extract_plane(1).unwrap();
        green.samples_mut()[0] = 0.125;
        img.replace_plane(1, &green).unwrap();
        assert_eq!(img.get(1, 0, 0), 0.125);
        assert_eq!(img.get(0, 0, 0), 0.5);
    }
}
