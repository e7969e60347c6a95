//! Image file I/O: 8-bit PNG and binary PPM (P6).
//!
//! Loading always yields an RGB buffer with samples scaled to [0, 1];
//! grayscale files are expanded, alpha is dropped. Saving quantizes with
//! round-half-up onto the 8-bit lattice, so save followed by load is the
//! identity for images whose samples already sit on that lattice.

use std::io::Write as _;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::{Colorspace, ImageBuf};
use crate::error::{Error, Result};

/// Quantizes a unit-range sample onto the 8-bit lattice, round half up.
#[inline]
pub(crate) fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

enum Format {
    Png,
    Ppm,
}

fn format_for(path: &Path) -> Result<Format> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Format::Png),
        "ppm" => Ok(Format::Ppm),
        other => Err(Error::MalformedImage {
            path: path.to_path_buf(),
            detail: format!("unsupported image format \".{other}\" (expected .png or .ppm)"),
        }),
    }
}

/// Loads an 8-bit PNG or binary PPM as an RGB buffer with samples in [0, 1].
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    match format_for(path)? {
        Format::Png => load_png(path),
        Format::Ppm => load_ppm(path),
    }
}

/// Saves a buffer as PNG or PPM, chosen by the path's extension.
///
/// RGB saves three channels, GRAY saves a single-channel PNG (replicated to
/// three for PPM). YUV must be converted back to RGB first.
pub fn save_image(path: impl AsRef<Path>, img: &ImageBuf) -> Result<()> {
    let path = path.as_ref();
    if img.colorspace() == Colorspace::Yuv {
        return Err(Error::ColorspaceMismatch { expected: "RGB or GRAY".into(), got: "YUV".into() });
    }
    match format_for(path)? {
        Format::Png => save_png(path, img),
        Format::Ppm => save_ppm(path, img),
    }
}

fn load_png(path: &Path) -> Result<ImageBuf> {
    let reader = image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| Error::MalformedImage {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (rgb, w, h) = match decoded {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            let mut rgb = Vec::with_capacity((w * h * 3) as usize);
            for p in g.pixels() {
                rgb.extend_from_slice(&[p.0[0], p.0[0], p.0[0]]);
            }
            (rgb, w, h)
        }
        DynamicImage::ImageLumaA8(g) => {
            let (w, h) = g.dimensions();
            let mut rgb = Vec::with_capacity((w * h * 3) as usize);
            for p in g.pixels() {
                rgb.extend_from_slice(&[p.0[0], p.0[0], p.0[0]]);
            }
            (rgb, w, h)
        }
        DynamicImage::ImageRgb8(b) => {
            let (w, h) = b.dimensions();
            (b.into_raw(), w, h)
        }
        DynamicImage::ImageRgba8(b) => {
            let (w, h) = b.dimensions();
            let mut rgb = Vec::with_capacity((w * h * 3) as usize);
            for p in b.pixels() {
                rgb.extend_from_slice(&p.0[..3]);
            }
            (rgb, w, h)
        }
        other => {
            return Err(Error::UnsupportedBitDepth {
                path: path.to_path_buf(),
                detail: format!("{:?} (only 8-bit samples are supported)", other.color()),
            })
        }
    };
    interleaved_to_planar(rgb, w as usize, h as usize)
}

fn save_png(path: &Path, img: &ImageBuf) -> Result<()> {
    let w = img.width() as u32;
    let h = img.height() as u32;
    let (bytes, color) = match img.colorspace() {
        Colorspace::Gray => {
            let bytes: Vec<u8> = img.plane(0).iter().map(|&v| quantize_u8(v)).collect();
            (bytes, image::ExtendedColorType::L8)
        }
        _ => (interleave_u8(img), image::ExtendedColorType::Rgb8),
    };
    image::save_buffer_with_format(path, &bytes, w, h, color, ImageFormat::Png).map_err(|e| {
        Error::io(path, std::io::Error::other(e.to_string()))
    })
}

fn load_ppm(path: &Path) -> Result<ImageBuf> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let malformed = |detail: &str| Error::MalformedImage {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };

    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(malformed("missing P6 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // Skip whitespace and '#' comment lines between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed("truncated header")),
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == start {
            return Err(malformed("expected integer header field"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap();
        *field = text.parse().map_err(|_| malformed("header field out of range"))?;
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedBitDepth {
            path: path.to_path_buf(),
            detail: format!("maxval {maxval} (only 8-bit samples are supported)"),
        });
    }
    if maxval == 0 {
        return Err(malformed("maxval must be positive"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(malformed("missing raster separator"));
    }
    pos += 1;
    let n = width * height * 3;
    let raster = bytes.get(pos..pos + n).ok_or_else(|| malformed("truncated raster"))?;

    let plane_len = width * height;
    let mut data = vec![0.0; 3 * plane_len];
    for (i, px) in raster.chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * plane_len + i] = px[c] as f64 / maxval as f64;
        }
    }
    ImageBuf::from_planar(width, height, Colorspace::Rgb, data)
}

fn save_ppm(path: &Path, img: &ImageBuf) -> Result<()> {
    let mut out = Vec::with_capacity(20 + img.plane_len() * 3);
    write!(out, "P6\n{} {}\n255\n", img.width(), img.height()).unwrap();
    out.extend_from_slice(&interleave_u8(img));
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&out).map_err(|e| Error::io(path, e))
}

fn interleaved_to_planar(rgb: Vec<u8>, width: usize, height: usize) -> Result<ImageBuf> {
    let plane_len = width * height;
    let mut data = vec![0.0; 3 * plane_len];
    for (i, px) in rgb.chunks_exact(3).enumerate() {
        for c in 0..3 {
            data[c * plane_len + i] = px[c] as f64 / 255.0;
        }
    }
    ImageBuf::from_planar(width, height, Colorspace::Rgb, data)
}

/// Interleaves to RGB bytes; GRAY replicates its single plane.
fn interleave_u8(img: &ImageBuf) -> Vec<u8> {
    let n = img.plane_len();
    let mut out = Vec::with_capacity(n * 3);
    for i in 0..n {
        for c in 0..3 {
            let plane = if img.channels() == 1 { 0 } else { c };
            out.push(quantize_u8(img.plane(plane)[i]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_image(w: usize, h: usize) -> ImageBuf {
        let n = w * h * 3;
        let data: Vec<f64> = (0..n).map(|i| ((i * 37) % 256) as f64 / 255.0).collect();
        ImageBuf::from_planar(w, h, Colorspace::Rgb, data).unwrap()
    }

    #[test]
    fn png_save_load_identity_on_lattice() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = lattice_image(13, 7);
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.width(), 13);
        assert_eq!(back.height(), 7);
        for (a, b) in img.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn ppm_save_load_identity_on_lattice() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.ppm");
        let img = lattice_image(5, 9);
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(img.samples(), back.samples());
    }

    #[test]
    fn quantization_rounds_half_up() {
        // 0.5/255 is exactly halfway between lattice points 0 and 1.
        assert_eq!(quantize_u8(0.5 / 255.0), 1);
        assert_eq!(quantize_u8(0.49 / 255.0), 0);
        assert_eq!(quantize_u8(-0.5), 0);
        assert_eq!(quantize_u8(2.0), 255);
    }

    #[test]
    fn gray_png_loads_as_rgb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let gray = ImageBuf::filled(4, 4, Colorspace::Gray, 128.0 / 255.0).unwrap();
        save_image(&path, &gray).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back.colorspace(), Colorspace::Rgb);
        assert!(back.samples().iter().all(|&v| (v - 128.0 / 255.0).abs() < 1e-12));
    }

    #[test]
    fn sixteen_bit_png_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let img16 = image::ImageBuffer::<image::Luma<u16>, _>::from_pixel(4, 4, image::Luma([40000u16]));
        img16.save(&path).unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(matches!(err, Error::UnsupportedBitDepth { .. }), "{err}");
    }

    #[test]
    fn malformed_ppm_reports_path_and_reason() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ppm");
        std::fs::write(&path, b"P6\n4 4\n255\nshort").unwrap();
        let err = load_image(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.ppm") && msg.contains("truncated raster"), "{msg}");
    }

    #[test]
    fn ppm_comments_and_odd_whitespace_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let mut bytes = b"P6 # comment\n# another\n 2\t1 # sizes\n255 ".to_vec();
        bytes.extend_from_slice(&[10, 20, 30, 40, 50, 60]);
        std::fs::write(&path, bytes).unwrap();
        let img = load_image(&path).unwrap();
        assert_eq!(img.width(), 2);
        assert!((img.get(0, 0, 0) - 10.0 / 255.0).abs() < 1e-12);
        assert!((img.get(2, 1, 0) - 60.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_image("/nonexistent/nope.png").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
