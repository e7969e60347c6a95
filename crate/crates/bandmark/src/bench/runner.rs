//! The evaluation matrix: methods crossed with attacks over a corpus.
//!
//! Each method embeds a fresh seeded message into every image through the
//! resolution-scaling path, then every cell attacks both the watermarked
//! and the clean image and decodes both. The clean decodes form the null
//! set: detection thresholds and score separation are judged against what
//! the decoder reports on content that never carried the payload.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, Corpus, KahanSum};
use crate::attacks::{apply_params, severity_params, AttackSpec};
use crate::error::{Error, Result};
use crate::image::{psnr, ssim, Colorspace, ImageBuf};
use crate::stats::tau_for_target_fpr;
use crate::watermark::{scaled_embed, scaled_extract, BitMessage, MethodId, WatermarkKey};

/// One cell of the evaluation matrix.
///
/// `attack: None` is the baseline cell every run includes: embed and
/// decode with nothing in between. `tpr_at_fpr` uses the closed-form
/// matched-bits threshold for each target false-positive rate; `auroc`
/// is empirical over the per-image soft scores against the null set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: MethodId,
    pub attack: Option<AttackSpec>,
    pub n_images: usize,
    pub bit_accuracy_mean: f64,
    pub tpr_at_fpr: BTreeMap<String, f64>,
    pub auroc: f64,
    /// Per-bit match rate of null decodes against the true messages;
    /// should sit at chance for a sanely keyed decoder.
    pub null_bit_match_rate: f64,
    pub psnr_mean: f64,
    pub ssim_mean: f64,
    pub corpus_hash: String,
}

/// Empirical separation of watermarked from null scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDetection {
    pub auroc: f64,
    pub tpr_at_fpr: BTreeMap<String, f64>,
}

fn fpr_label(fpr: f64) -> String {
    format!("{fpr:e}")
}

/// Rank-based AUROC (ties count half) and empirical TPR at thresholds set
/// from the null set's upper quantiles (higher-rank interpolation).
pub fn empirical_detection(
    scores_watermarked: &[f64],
    scores_null: &[f64],
    targets: &[f64],
) -> Result<EmpiricalDetection> {
    if scores_watermarked.is_empty() || scores_null.is_empty() {
        return Err(Error::Domain("empirical detection needs both score sets nonempty".into()));
    }
    let n_w = scores_watermarked.len();
    let n_0 = scores_null.len();

    let mut all: Vec<(f64, bool)> = scores_watermarked
        .iter()
        .map(|&s| (s, true))
        .chain(scores_null.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum_w = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // Tied block occupies ranks i+1..=j; everyone gets the average.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for item in &all[i..j] {
            if item.1 {
                rank_sum_w += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_w - (n_w * (n_w + 1)) as f64 / 2.0;
    let auroc = u / (n_w as f64 * n_0 as f64);

    let mut null_sorted = scores_null.to_vec();
    null_sorted.sort_by(|a, b| a.total_cmp(b));
    let mut tpr_at_fpr = BTreeMap::new();
    for &fpr in targets {
        if !(0.0 < fpr && fpr < 1.0) {
            return Err(Error::Domain(format!("target fpr must be in (0, 1), got {fpr}")));
        }
        let pos = (n_0 - 1) as f64 * (1.0 - fpr);
        let tau = null_sorted[pos.ceil() as usize];
        let tpr = scores_watermarked.iter().filter(|&&s| s > tau).count() as f64 / n_w as f64;
        tpr_at_fpr.insert(fpr_label(fpr), tpr);
    }
    Ok(EmpiricalDetection { auroc, tpr_at_fpr })
}

/// Quantizes an image to the corpus sample depth, so every stage of the
/// matrix sees what a saved file would hold.
fn to_depth(img: &ImageBuf) -> (Vec<u8>, ImageBuf) {
    let bytes: Vec<u8> =
        img.samples().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let floats: Vec<f64> = bytes.iter().map(|&b| b as f64 / 255.0).collect();
    let buf = ImageBuf::from_planar(img.width(), img.height(), img.colorspace(), floats)
        .expect("quantization preserves shape");
    (bytes, buf)
}

fn from_depth(bytes: &[u8], w: usize, h: usize) -> ImageBuf {
    let floats: Vec<f64> = bytes.iter().map(|&b| b as f64 / 255.0).collect();
    ImageBuf::from_planar(w, h, Colorspace::Rgb, floats).expect("stored planes keep their shape")
}

struct EmbeddedSet {
    messages: Vec<BitMessage>,
    marked: Vec<Vec<u8>>,
    psnr_mean: f64,
    ssim_mean: f64,
}

fn embed_corpus(
    corpus: &Corpus,
    method: MethodId,
    method_idx: usize,
    key: &WatermarkKey,
    master_seed: u64,
) -> Result<EmbeddedSet> {
    use rand::SeedableRng;
    let per_image: Vec<(BitMessage, Vec<u8>, f64, f64)> = (0..corpus.len())
        .into_par_iter()
        .map(|i| -> Result<(BitMessage, Vec<u8>, f64, f64)> {
            let img = corpus.image(i);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(
                master_seed,
                1,
                method_idx as u64,
                i as u64,
            ));
            let msg = BitMessage::random(key.k, &mut rng)?;
            let marked = scaled_embed(method, &img, &msg, key)?;
            let (bytes, quantized) = to_depth(&marked);
            let p = psnr(&img, &quantized)?;
            let s = ssim(&img, &quantized)?;
            Ok((msg, bytes, p, s))
        })
        .collect::<Result<_>>()?;

    let mut p_sum = KahanSum::default();
    let mut s_sum = KahanSum::default();
    let mut messages = Vec::with_capacity(per_image.len());
    let mut marked = Vec::with_capacity(per_image.len());
    for (msg, bytes, p, s) in per_image {
        p_sum.add(p);
        s_sum.add(s);
        messages.push(msg);
        marked.push(bytes);
    }
    let n = corpus.len() as f64;
    Ok(EmbeddedSet {
        messages,
        marked,
        psnr_mean: p_sum.value() / n,
        ssim_mean: s_sum.value() / n,
    })
}

/// Per-image cell outcome: matched bit count, toward-truth score for the
/// watermarked decode, the same for the null decode, and the null decode's
/// matched bit count.
struct CellOutcome {
    matched: usize,
    score_w: f64,
    score_null: f64,
    null_matched: usize,
}

fn toward_truth_score(truth: &BitMessage, decoded: &BitMessage, scores: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((t, d), &s) in truth.bits().iter().zip(decoded.bits()).zip(scores) {
        acc += if t == d { s } else { -s };
    }
    acc / truth.len() as f64
}

/// Runs the full matrix. `keys` pairs with `methods` by position. Every
/// method gets an implicit no-attack baseline cell before the requested
/// attacks. Deterministic for a fixed (corpus, keys, master_seed).
pub fn run_benchmark(
    corpus: &Corpus,
    methods: &[MethodId],
    keys: &[WatermarkKey],
    attacks: &[AttackSpec],
    targets: &[f64],
    master_seed: u64,
) -> Result<Vec<BenchRecord>> {
    if corpus.is_empty() {
        return Err(Error::Domain("corpus is empty".into()));
    }
    if methods.is_empty() || methods.len() != keys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} methods with {} keys",
            methods.len(),
            keys.len()
        )));
    }
    for &fpr in targets {
        if !(0.0 < fpr && fpr < 1.0) {
            return Err(Error::Domain(format!("target fpr must be in (0, 1), got {fpr}")));
        }
    }
    let (w, h) = (corpus.width(), corpus.height());
    let n = corpus.len();

    let mut records = Vec::new();
    for (method_idx, (&method, key)) in methods.iter().zip(keys).enumerate() {
        key.validate()?;
        let embedded = embed_corpus(corpus, method, method_idx, key, master_seed)?;
        let taus: Vec<(String, usize)> = targets
            .iter()
            .map(|&t| Ok((fpr_label(t), tau_for_target_fpr(key.k, 0.5, t)?)))
            .collect::<Result<_>>()?;

        for (attack_idx, attack) in
            std::iter::once(None).chain(attacks.iter().copied().map(Some)).enumerate()
        {
            let params = match &attack {
                None => None,
                Some(spec) => Some((severity_params(spec.kind, spec.severity)?, spec.seed)),
            };
            let cell = (method_idx * (attacks.len() + 1) + attack_idx) as u64;
            let outcomes: Vec<CellOutcome> = (0..n)
                .into_par_iter()
                .map(|i| -> Result<CellOutcome> {
                    let marked = from_depth(&embedded.marked[i], w, h);
                    let clean = corpus.image(i);
                    let (attacked_w, attacked_null) = match &params {
                        None => (marked, clean),
                        Some((p, spec_seed)) => {
                            let s_w = derive_seed(master_seed ^ spec_seed, 2, cell, i as u64);
                            let s_0 = derive_seed(master_seed ^ spec_seed, 3, cell, i as u64);
                            (apply_params(&marked, p, s_w)?, apply_params(&clean, p, s_0)?)
                        }
                    };
                    let truth = &embedded.messages[i];
                    let got_w = scaled_extract(method, &attacked_w, key)?;
                    let got_0 = scaled_extract(method, &attacked_null, key)?;
                    let matched = crate::stats::matching_bits(truth, &got_w.message)?;
                    let null_matched = crate::stats::matching_bits(truth, &got_0.message)?;
                    Ok(CellOutcome {
                        matched,
                        score_w: toward_truth_score(truth, &got_w.message, &got_w.scores),
                        score_null: toward_truth_score(truth, &got_0.message, &got_0.scores),
                        null_matched,
                    })
                })
                .collect::<Result<_>>()?;

            let mut acc_sum = KahanSum::default();
            let mut null_sum = KahanSum::default();
            let mut scores_w = Vec::with_capacity(n);
            let mut scores_null = Vec::with_capacity(n);
            for o in &outcomes {
                acc_sum.add(o.matched as f64 / key.k as f64);
                null_sum.add(o.null_matched as f64 / key.k as f64);
                scores_w.push(o.score_w);
                scores_null.push(o.score_null);
            }
            let mut tpr_at_fpr = BTreeMap::new();
            for (label, tau) in &taus {
                let hits = outcomes.iter().filter(|o| o.matched > *tau).count();
                tpr_at_fpr.insert(label.clone(), hits as f64 / n as f64);
            }
            let detection = empirical_detection(&scores_w, &scores_null, targets)?;

            records.push(BenchRecord {
                method,
                attack,
                n_images: n,
                bit_accuracy_mean: acc_sum.value() / n as f64,
                tpr_at_fpr,
                auroc: detection.auroc,
                null_bit_match_rate: null_sum.value() / n as f64,
                psnr_mean: embedded.psnr_mean,
                ssim_mean: embedded.ssim_mean,
                corpus_hash: corpus.hash().to_string(),
            });
        }
    }
    Ok(records)
}
