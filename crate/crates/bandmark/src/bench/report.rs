//! Report serialization and heatmap rendering.
//!
//! Two output formats share one schema version. JSON files carry full
//! records, one per line after a header line, and are the roundtrip
//! format. CSV files carry flat matrices for spreadsheet use: a header
//! comment, a column row, then one row per record. Both end with a
//! newline so concatenation and diffing behave.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::analysis::SpectralReport;
use super::runner::BenchRecord;
use super::{Error, Result};
use crate::attacks::LADDER_VERSION;
use crate::image::{save_image, Colorspace, ImageBuf};
use crate::spectral::MagnitudeMap;

/// Identifies the report layout. Bump when field order or meaning changes.
pub const SCHEMA_VERSION: &str = "bandmark-report-v1";

/// Serialization format for [`write_report`] and [`write_spectral_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Header line, then one JSON record per line.
    Json,
    /// Header comment, column names, then one row per record.
    Csv,
}

fn header_json() -> String {
    format!("{{\"schema\":\"{SCHEMA_VERSION}\",\"ladder\":\"{LADDER_VERSION}\"}}")
}

fn header_csv() -> String {
    format!("# schema={SCHEMA_VERSION} ladder={LADDER_VERSION}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes benchmark records to `path`.
///
/// Field order is fixed by the record type, so reruns over identical
/// inputs produce byte-identical files. An empty slice still produces a
/// valid file holding only the header (and, for CSV, the column row).
pub fn write_report(records: &[BenchRecord], format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out.push_str(&header_json());
            out.push('\n');
            for rec in records {
                out.push_str(&serde_json::to_string(rec)?);
                out.push('\n');
            }
        }
        ReportFormat::Csv => {
            out.push_str(&header_csv());
            out.push('\n');
            let targets: Vec<String> = records
                .first()
                .map(|r| r.tpr_at_fpr.keys().cloned().collect())
                .unwrap_or_else(|| vec!["1e-3".into(), "1e-2".into()]);
            out.push_str("method,attack_kind,severity,seed,n_images,bit_accuracy_mean");
            for t in &targets {
                let _ = write!(out, ",tpr_at_fpr_{t}");
            }
            out.push_str(",auroc,null_bit_match_rate,psnr_mean,ssim_mean,corpus_hash\n");
            for rec in records {
                for t in &targets {
                    if !rec.tpr_at_fpr.contains_key(t) {
                        return Err(Error::ShapeMismatch(format!(
                            "record for {:?} lacks TPR target {t}; CSV columns must be uniform",
                            rec.method
                        )));
                    }
                }
                let (kind, severity, seed) = match rec.attack {
                    Some(a) => (format!("{:?}", a.kind), a.severity, a.seed),
                    None => ("NONE".into(), 0, 0),
                };
                let _ = write!(
                    out,
                    "{:?},{kind},{severity},{seed},{},{}",
                    rec.method, rec.n_images, rec.bit_accuracy_mean
                );
                for t in &targets {
                    let _ = write!(out, ",{}", rec.tpr_at_fpr[t]);
                }
                let _ = writeln!(
                    out,
                    ",{},{},{},{},{}",
                    rec.auroc, rec.null_bit_match_rate, rec.psnr_mean, rec.ssim_mean, rec.corpus_hash
                );
            }
        }
    }
    write_text(path, &out)
}

/// Reads a JSON benchmark report written by [`write_report`] back into
/// records, checking the schema header.
pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::BadMessage("empty report file".into()))?;
    if header != header_json() {
        return Err(Error::BadMessage(format!("unrecognized report header: {header}")));
    }
    let mut records = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        records.push(serde_json::from_str(line)?);
    }
    Ok(records)
}

/// Writes a spectral retention report to `path`.
///
/// JSON embeds the full record including the mean difference map. CSV
/// flattens the single-channel mean of the map into a `height x width`
/// matrix, one spectrum row per line, after the retention summary row.
pub fn write_spectral_report(report: &SpectralReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            out.push_str(&header_json());
            out.push('\n');
            out.push_str(&serde_json::to_string(report)?);
            out.push('\n');
        }
        ReportFormat::Csv => {
            out.push_str(&header_csv());
            out.push('\n');
            out.push_str("kind,severity,seed,amplitude,n_images,retention_low,retention_mid,retention_high\n");
            let _ = writeln!(
                out,
                "{:?},{},{},{},{},{},{},{}",
                report.kind,
                report.severity,
                report.seed,
                report.amplitude,
                report.n_images,
                report.retention_low,
                report.retention_mid,
                report.retention_high
            );
            let map = report.mean_diff_map.mean_over_channels();
            let (w, h) = (map.width(), map.height());
            let plane = map.plane(0);
            for row in 0..h {
                for col in 0..w {
                    if col > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{}", plane[row * w + col]);
                }
                out.push('\n');
            }
        }
    }
    write_text(path, &out)
}

/// Renders a magnitude map as an 8-bit grayscale PNG.
///
/// Channels are averaged, the DC bin is shifted to the image center,
/// values are `log1p` compressed, then min-max normalized. A map with
/// no variation (all zeros included) renders as uniform black.
pub fn render_heatmap(map: &MagnitudeMap, path: impl AsRef<Path>) -> Result<()> {
    let mean = map.mean_over_channels();
    let (w, h) = (mean.width(), mean.height());
    let plane = mean.plane(0);

    let mut shifted = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let sx = (x + w / 2) % w;
            let sy = (y + h / 2) % h;
            shifted[sy * w + sx] = plane[y * w + x].ln_1p();
        }
    }

    let lo = shifted.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = shifted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let norm: Vec<f64> = if span > 0.0 {
        shifted.iter().map(|v| (v - lo) / span).collect()
    } else {
        vec![0.0; w * h]
    };

    let img = ImageBuf::from_planar(w, h, Colorspace::Gray, norm)?;
    save_image(path, &img)
}
