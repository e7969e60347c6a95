//! Command-line surface tying the toolkit together for batch, scriptable use.
//!
//! Every subcommand prints exactly one machine-readable JSON line to
//! stdout; diagnostics and usage text go to stderr. Exit codes: 0 on
//! success, 1 for usage errors, 2 for runtime errors, 3 when `extract
//! --truth` ran cleanly but did not detect the watermark. Each run
//! echoes its fully resolved configuration into whatever report it
//! writes, so results stay reproducible from the artifacts alone.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::attacks::{apply_params, severity_params, AttackKind, AttackSpec, LADDER_VERSION};
use crate::bench::{
    frequency_analysis, render_heatmap, run_benchmark, write_report, write_spectral_report,
    Corpus, ReportFormat, SCHEMA_VERSION,
};
use crate::image::{load_image, psnr, save_image};
use crate::spectral::BandName;
use crate::stats;
use crate::watermark::{scaled_embed, scaled_extract, BitMessage, MethodId, WatermarkKey};
use crate::{Error, Result};

/// Environment variable consulted when `--corpus` is not given.
pub const CORPUS_ENV: &str = "BANDMARK_CORPUS";

fn version_string() -> String {
    format!(
        "{} (schema {SCHEMA_VERSION}, ladder {LADDER_VERSION})",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Parser)]
#[command(name = "bandmark", version = version_string(), about = "Blind image watermarking and robustness benchmark toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Embed a payload into an image at any resolution.
    Embed {
        /// Watermarking method: lfqim, dwt_dct, or dwt_dct_svd.
        #[arg(short, long)]
        method: String,
        /// Input image (PNG or PPM).
        #[arg(short = 'i', long)]
        input: PathBuf,
        /// Output path for the marked image.
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Payload as hex, exactly ceil(k/4) digits for the key's k.
        #[arg(long)]
        msg: String,
        /// Key file (JSON).
        #[arg(long)]
        key: PathBuf,
    },
    /// Decode a payload; optionally test detection against a known truth.
    Extract {
        /// Watermarking method: lfqim, dwt_dct, or dwt_dct_svd.
        #[arg(short, long)]
        method: String,
        /// Image to decode.
        #[arg(short = 'i', long)]
        input: PathBuf,
        /// Key file (JSON).
        #[arg(long)]
        key: PathBuf,
        /// Ground-truth payload in hex; enables the detection decision.
        #[arg(long)]
        truth: Option<String>,
        /// Target false-positive rate for the detection threshold.
        #[arg(long, default_value_t = 1e-3)]
        fpr: f64,
    },
    /// Apply one attack from the severity ladder to an image.
    Attack {
        /// Input image.
        #[arg(short = 'i', long)]
        input: PathBuf,
        /// Output path for the attacked image.
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Attack kind, snake_case (see `attacks --list`).
        #[arg(long)]
        kind: String,
        /// Severity rung, 1 (mildest) through 5 (harshest).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        severity: u8,
        /// Seed for stochastic attacks; deterministic ones ignore it.
        #[arg(long)]
        seed: u64,
    },
    /// Measure band retention of a ring pattern under an attack.
    Analyze {
        /// Corpus directory; falls back to $BANDMARK_CORPUS.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Band the pattern is inserted into: low, mid, or high.
        #[arg(long)]
        band: String,
        /// Attack kind, snake_case.
        #[arg(long)]
        kind: String,
        /// Severity rung 1..=5, or 0 for the identity control.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=5))]
        severity: u8,
        /// Ring pattern amplitude (spectral magnitude per bin).
        #[arg(long, default_value_t = 2.0)]
        amp: f64,
        /// Seed for stochastic attacks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output report path (JSON).
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Optional heatmap PNG of the mean spectral difference.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Run the full robustness benchmark and write reports.
    Bench {
        /// Corpus directory; falls back to $BANDMARK_CORPUS.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Methods to benchmark, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<String>,
        /// Attack cells as kind:severity or kind:severity:seed, comma
        /// separated. The no-attack baseline cell is always included.
        #[arg(long, value_delimiter = ',', default_value = "")]
        attacks: Vec<String>,
        /// Output directory for reports, config echo, and manifest.
        #[arg(long)]
        out: PathBuf,
        /// Master seed; keys, payloads, and attack draws derive from it.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Detection FPR targets, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1e-3, 1e-2])]
        targets: Vec<f64>,
    },
    /// Closed-form detection statistics.
    Stats {
        #[command(subcommand)]
        which: StatsCmd,
    },
    /// Inspect the attack severity ladder.
    Attacks {
        /// Dump the full ladder as JSON.
        #[arg(long)]
        list: bool,
    },
    /// Generate a key file for a method.
    Keygen {
        /// Watermarking method: lfqim, dwt_dct, or dwt_dct_svd.
        #[arg(short, long)]
        method: String,
        /// Key seed.
        #[arg(long)]
        seed: u64,
        /// Output key path (JSON).
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Native embedding width.
        #[arg(long, default_value_t = 256)]
        width: usize,
        /// Native embedding height.
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
}

#[derive(Subcommand)]
enum StatsCmd {
    /// False-positive rate of the threshold test at tau.
    Fpr {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        tau: usize,
        /// Per-bit match probability under the null.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// True-positive rate of the threshold test at tau.
    Tpr {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        tau: usize,
        /// Per-bit match probability for watermarked inputs.
        #[arg(long)]
        p: f64,
    },
    /// Smallest threshold whose FPR does not exceed the target.
    Tau {
        #[arg(long)]
        k: usize,
        /// Per-bit match probability under the null.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        target: f64,
    },
}

/// Parses argv and runs one subcommand, returning the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}

fn usage(msg: &str) -> i32 {
    eprintln!("usage error: {msg}");
    1
}

fn parse_method(s: &str) -> Option<MethodId> {
    match s {
        "lfqim" => Some(MethodId::Lfqim),
        "dwt_dct" => Some(MethodId::DwtDct),
        "dwt_dct_svd" => Some(MethodId::DwtDctSvd),
        _ => None,
    }
}

fn method_name(m: MethodId) -> &'static str {
    match m {
        MethodId::Lfqim => "lfqim",
        MethodId::DwtDct => "dwt_dct",
        MethodId::DwtDctSvd => "dwt_dct_svd",
    }
}

fn parse_kind(s: &str) -> Option<AttackKind> {
    AttackKind::ALL.iter().copied().find(|k| kind_name(*k) == s)
}

fn kind_name(k: AttackKind) -> &'static str {
    match k {
        AttackKind::Saturation => "saturation",
        AttackKind::Contrast => "contrast",
        AttackKind::Brightness => "brightness",
        AttackKind::Jpeg => "jpeg",
        AttackKind::GaussNoise => "gauss_noise",
        AttackKind::ShotNoise => "shot_noise",
        AttackKind::ImpulseNoise => "impulse_noise",
        AttackKind::SpeckleNoise => "speckle_noise",
        AttackKind::Pixelate => "pixelate",
        AttackKind::DefocusBlur => "defocus_blur",
        AttackKind::ZoomBlur => "zoom_blur",
        AttackKind::GaussBlur => "gauss_blur",
        AttackKind::MotionBlur => "motion_blur",
    }
}

fn parse_band(s: &str) -> Option<BandName> {
    match s {
        "low" => Some(BandName::Low),
        "mid" => Some(BandName::Mid),
        "high" => Some(BandName::High),
        _ => None,
    }
}

/// Parses one benchmark attack cell: kind:severity or kind:severity:seed.
fn parse_attack_cell(s: &str) -> std::result::Result<AttackSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(format!("attack cell '{s}' is not kind:severity[:seed]"));
    }
    let kind = parse_kind(parts[0]).ok_or_else(|| format!("unknown attack kind '{}'", parts[0]))?;
    let severity: u8 = parts[1]
        .parse()
        .map_err(|_| format!("severity '{}' is not an integer", parts[1]))?;
    if !(1..=5).contains(&severity) {
        return Err(format!("severity {severity} outside 1..=5"));
    }
    let seed: u64 = match parts.get(2) {
        Some(t) => t.parse().map_err(|_| format!("seed '{t}' is not an integer"))?,
        None => 0,
    };
    Ok(AttackSpec { kind, severity, seed })
}

fn resolve_corpus(flag: Option<PathBuf>) -> std::result::Result<PathBuf, String> {
    if let Some(dir) = flag {
        return Ok(dir);
    }
    match std::env::var_os(CORPUS_ENV) {
        Some(v) if !v.is_empty() => Ok(PathBuf::from(v)),
        _ => Err(format!("no corpus directory: pass --corpus or set ${CORPUS_ENV}")),
    }
}

fn emit(value: &serde_json::Value) {
    println!("{value}");
}

fn dispatch(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Embed { method, input, output, msg, key } => {
            let Some(m) = parse_method(&method) else {
                return Ok(usage(&format!("unknown method '{method}'")));
            };
            let key_params = WatermarkKey::load(&key)?;
            let payload = match BitMessage::from_hex(&msg, key_params.k) {
                Ok(p) => p,
                Err(e) => return Ok(usage(&format!("bad --msg: {e}"))),
            };
            let img = load_image(&input)?;
            let marked = scaled_embed(m, &img, &payload, &key_params)?;
            save_image(&output, &marked)?;
            let quality = psnr(&img, &marked)?;
            emit(&json!({
                "command": "embed",
                "method": method_name(m),
                "input": input.display().to_string(),
                "output": output.display().to_string(),
                "msg": payload.to_hex(),
                "key": key.display().to_string(),
                "k": key_params.k,
                "native": key_params.native,
                "psnr": quality,
            }));
            Ok(0)
        }
        Cmd::Extract { method, input, key, truth, fpr } => {
            let Some(m) = parse_method(&method) else {
                return Ok(usage(&format!("unknown method '{method}'")));
            };
            let key_params = WatermarkKey::load(&key)?;
            let img = load_image(&input)?;
            let extraction = scaled_extract(m, &img, &key_params)?;
            let mut out = json!({
                "command": "extract",
                "method": method_name(m),
                "input": input.display().to_string(),
                "key": key.display().to_string(),
                "message": extraction.message.to_hex(),
            });
            let mut code = 0;
            if let Some(truth_hex) = truth {
                let truth_msg = match BitMessage::from_hex(&truth_hex, key_params.k) {
                    Ok(t) => t,
                    Err(e) => return Ok(usage(&format!("bad --truth: {e}"))),
                };
                if !(fpr > 0.0 && fpr < 1.0) {
                    return Ok(usage(&format!("--fpr must be in (0, 1), got {fpr}")));
                }
                let matched = stats::matching_bits(&truth_msg, &extraction.message)?;
                let tau = stats::tau_for_target_fpr(key_params.k, 0.5, fpr)?;
                let achieved = stats::fpr_at_tau(key_params.k, tau, 0.5)?;
                let detected = matched > tau;
                let obj = out.as_object_mut().expect("json object");
                obj.insert("bit_accuracy".into(), json!(matched as f64 / key_params.k as f64));
                obj.insert("matched_bits".into(), json!(matched));
                obj.insert("tau".into(), json!(tau));
                obj.insert("fpr_target".into(), json!(fpr));
                obj.insert("fpr_at_tau".into(), json!(achieved));
                obj.insert("detected".into(), json!(detected));
                if !detected {
                    code = 3;
                }
            }
            emit(&out);
            Ok(code)
        }
        Cmd::Attack { input, output, kind, severity, seed } => {
            let Some(k) = parse_kind(&kind) else {
                return Ok(usage(&format!("unknown attack kind '{kind}'")));
            };
            let params = severity_params(k, severity)?;
            let img = load_image(&input)?;
            let attacked = apply_params(&img, &params, seed)?;
            save_image(&output, &attacked)?;
            let distortion = psnr(&img, &attacked)?;
            emit(&json!({
                "command": "attack",
                "kind": kind_name(k),
                "severity": severity,
                "seed": seed,
                "params": params,
                "input": input.display().to_string(),
                "output": output.display().to_string(),
                "psnr": distortion,
            }));
            Ok(0)
        }
        Cmd::Analyze { corpus, band, kind, severity, amp, seed, output, heatmap } => {
            let dir = match resolve_corpus(corpus) {
                Ok(d) => d,
                Err(msg) => return Ok(usage(&msg)),
            };
            let Some(band_name) = parse_band(&band) else {
                return Ok(usage(&format!("unknown band '{band}'; expected low, mid, or high")));
            };
            let Some(k) = parse_kind(&kind) else {
                return Ok(usage(&format!("unknown attack kind '{kind}'")));
            };
            let corpus = Corpus::load(&dir)?;
            let report = frequency_analysis(&corpus, &band_name.spec(), k, severity, seed, amp)?;
            write_spectral_report(&report, ReportFormat::Json, &output)?;
            if let Some(hm) = &heatmap {
                render_heatmap(&report.mean_diff_map, hm)?;
            }
            emit(&json!({
                "command": "analyze",
                "corpus": dir.display().to_string(),
                "corpus_hash": corpus.hash(),
                "n_images": report.n_images,
                "band": band,
                "kind": kind_name(k),
                "severity": severity,
                "seed": seed,
                "amplitude": amp,
                "retention_low": report.retention_low,
                "retention_mid": report.retention_mid,
                "retention_high": report.retention_high,
                "report": output.display().to_string(),
                "heatmap": heatmap.as_ref().map(|p| p.display().to_string()),
            }));
            Ok(0)
        }
        Cmd::Bench { corpus, methods, attacks, out, seed, targets } => {
            let dir = match resolve_corpus(corpus) {
                Ok(d) => d,
                Err(msg) => return Ok(usage(&msg)),
            };
            let mut method_ids = Vec::new();
            for name in methods.iter().filter(|s| !s.is_empty()) {
                let Some(m) = parse_method(name) else {
                    return Ok(usage(&format!("unknown method '{name}'")));
                };
                if method_ids.contains(&m) {
                    return Ok(usage(&format!("method '{name}' listed twice")));
                }
                method_ids.push(m);
            }
            if method_ids.is_empty() {
                return Ok(usage("no methods given"));
            }
            let mut attack_specs = Vec::new();
            for cell in attacks.iter().filter(|s| !s.is_empty()) {
                match parse_attack_cell(cell) {
                    Ok(spec) => attack_specs.push(spec),
                    Err(msg) => return Ok(usage(&msg)),
                }
            }
            for t in &targets {
                if !(*t > 0.0 && *t < 1.0) {
                    return Ok(usage(&format!("FPR target {t} outside (0, 1)")));
                }
            }
            let corpus = Corpus::load(&dir)?;
            let keys: Vec<WatermarkKey> =
                method_ids.iter().map(|&m| WatermarkKey::new(m, seed)).collect();
            let records =
                run_benchmark(&corpus, &method_ids, &keys, &attack_specs, &targets, seed)?;

            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let report_json = out.join("report.json");
            let report_csv = out.join("report.csv");
            let config_path = out.join("config.json");
            let manifest_path = out.join("corpus_manifest.json");
            write_report(&records, ReportFormat::Json, &report_json)?;
            write_report(&records, ReportFormat::Csv, &report_csv)?;

            let config = json!({
                "schema": SCHEMA_VERSION,
                "ladder": LADDER_VERSION,
                "command": "bench",
                "corpus": dir.display().to_string(),
                "corpus_hash": corpus.hash(),
                "n_images": corpus.len(),
                "image_size": [corpus.width(), corpus.height()],
                "methods": method_ids.iter().map(|&m| method_name(m)).collect::<Vec<_>>(),
                "keys": keys,
                "attacks": attack_specs,
                "targets": targets,
                "master_seed": seed,
            });
            write_json_file(&config_path, &config)?;
            let manifest = json!({
                "directory": dir.display().to_string(),
                "files": corpus.names(),
                "sha256": corpus.hash(),
            });
            write_json_file(&manifest_path, &manifest)?;

            emit(&json!({
                "command": "bench",
                "records": records.len(),
                "out": out.display().to_string(),
                "report_json": report_json.display().to_string(),
                "report_csv": report_csv.display().to_string(),
                "config": config_path.display().to_string(),
                "manifest": manifest_path.display().to_string(),
            }));
            Ok(0)
        }
        Cmd::Stats { which } => {
            match which {
                StatsCmd::Fpr { k, tau, p } => println!("{:e}", stats::fpr_at_tau(k, tau, p)?),
                StatsCmd::Tpr { k, tau, p } => println!("{:e}", stats::tpr_at_tau(k, tau, p)?),
                StatsCmd::Tau { k, p, target } => {
                    println!("{}", stats::tau_for_target_fpr(k, p, target)?)
                }
            }
            Ok(0)
        }
        Cmd::Attacks { list } => {
            if !list {
                return Ok(usage("nothing to do: pass --list"));
            }
            let mut ladder = serde_json::Map::new();
            for kind in AttackKind::ALL {
                let rungs: Vec<serde_json::Value> = (1..=5u8)
                    .map(|s| Ok(json!({ "severity": s, "params": severity_params(kind, s)? })))
                    .collect::<Result<_>>()?;
                ladder.insert(kind_name(kind).to_string(), json!(rungs));
            }
            emit(&json!({ "ladder_version": LADDER_VERSION, "attacks": ladder }));
            Ok(0)
        }
        Cmd::Keygen { method, seed, output, width, height } => {
            let Some(m) = parse_method(&method) else {
                return Ok(usage(&format!("unknown method '{method}'")));
            };
            let mut key = WatermarkKey::new(m, seed);
            key.native = [width, height];
            key.validate()?;
            key.save(&output)?;
            emit(&json!({
                "command": "keygen",
                "method": method_name(m),
                "seed": seed,
                "k": key.k,
                "native": key.native,
                "output": output.display().to_string(),
            }));
            Ok(0)
        }
    }
}

fn write_json_file(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(parts: &[&str]) -> Vec<String> {
        std::iter::once("bandmark".to_string())
            .chain(parts.iter().map(|s| s.to_string()))
            .collect()
    }

    #[test]
    fn kind_names_roundtrip() {
        for kind in AttackKind::ALL {
            assert_eq!(parse_kind(kind_name(kind)), Some(kind));
        }
        assert_eq!(parse_kind("gaussian"), None);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in [MethodId::Lfqim, MethodId::DwtDct, MethodId::DwtDctSvd] {
            assert_eq!(parse_method(method_name(m)), Some(m));
        }
        assert_eq!(parse_method("vine"), None);
    }

    #[test]
    fn attack_cell_parsing() {
        let spec = parse_attack_cell("gauss_blur:3").unwrap();
        assert_eq!(spec.kind, AttackKind::GaussBlur);
        assert_eq!(spec.severity, 3);
        assert_eq!(spec.seed, 0);
        let spec = parse_attack_cell("jpeg:2:99").unwrap();
        assert_eq!(spec.seed, 99);
        assert!(parse_attack_cell("jpeg").is_err());
        assert!(parse_attack_cell("jpeg:0").is_err());
        assert!(parse_attack_cell("jpeg:6").is_err());
        assert!(parse_attack_cell("jpeg:2:x").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(argv(&["no_such_command"])), 1);
        assert_eq!(run(argv(&["stats", "fpr", "--tau", "70"])), 1);
        assert_eq!(
            run(argv(&[
                "attack", "-i", "a.png", "-o", "b.png", "--kind", "gauss_blur", "--severity",
                "0", "--seed", "1"
            ])),
            1
        );
    }

    #[test]
    fn stats_fpr_matches_library() {
        assert_eq!(run(argv(&["stats", "fpr", "--k", "100", "--tau", "70", "--p", "0.5"])), 0);
        assert_eq!(run(argv(&["stats", "tau", "--k", "100", "--target", "1e-3"])), 0);
    }

    #[test]
    fn help_and_version_exit_zero() {
        assert_eq!(run(argv(&["--help"])), 0);
        assert_eq!(run(argv(&["--version"])), 0);
        assert_eq!(run(argv(&["embed", "--help"])), 0);
    }

    #[test]
    fn missing_file_is_runtime_error() {
        let dir = tempfile::tempdir().unwrap();
        let key = dir.path().join("key.json");
        assert_eq!(run(argv(&["keygen", "-m", "lfqim", "--seed", "5", "-o", key.to_str().unwrap()])), 0);
        assert_eq!(
            run(argv(&[
                "extract",
                "-m",
                "lfqim",
                "-i",
                dir.path().join("missing.png").to_str().unwrap(),
                "--key",
                key.to_str().unwrap(),
            ])),
            2
        );
    }
}
