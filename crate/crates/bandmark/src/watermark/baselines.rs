//! Wavelet-domain baseline embedders.
//!
//! Both schemes tile one sub-band of a single-level Haar transform of the
//! luma plane into 8x8 blocks and write payload bits round-robin across a
//! keyed permutation of the blocks. Each block's bit is whitened by a
//! keyed coin flip before embedding, so decoding unwatermarked content
//! with any key yields chance-level bits by construction.
//!
//! The coefficient-pair scheme pushes two mid-frequency DCT coefficients
//! of an HL-band block apart until their difference clears a margin whose
//! sign encodes the bit. The singular-value scheme quantizes the leading
//! singular value of an LL-band block to a step lattice whose parity
//! encodes the bit, by scaling the whole block so the singular value order
//! is preserved exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lfqim::Extraction;
use super::{BitMessage, WatermarkKey};
use crate::error::{Error, Result};
use crate::image::{from_yuv, to_yuv, ImageBuf};
use crate::spectral::{dct2_block, haar_dwt2, haar_idwt2, idct2_block, svd_small, BLOCK};

/// DCT coefficients compared by the coefficient-pair scheme, as
/// (column, row) frequency indices into an 8x8 block.
const PAIR_A: (usize, usize) = (2, 1);
const PAIR_B: (usize, usize) = (1, 2);

/// Keyed block layout shared by embed and extract: a permutation of the
/// sub-band's 8x8 tiles and one whitening bit per tile.
struct BlockPlan {
    blocks_x: usize,
    /// Tile indices in visiting order; tile `j` carries payload bit
    /// `j mod k`, XORed with `white[j]`.
    order: Vec<usize>,
    white: Vec<bool>,
}

fn block_plan(key: &WatermarkKey, band_w: usize, band_h: usize) -> Result<BlockPlan> {
    let blocks_x = band_w / BLOCK;
    let blocks_y = band_h / BLOCK;
    let total = blocks_x * blocks_y;
    if total < key.k {
        return Err(Error::Capacity { needed: key.k, available: total });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(key.seed);
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let white: Vec<bool> = (0..total).map(|_| rng.random::<bool>()).collect();
    Ok(BlockPlan { blocks_x, order, white })
}

fn check_embed_args(img: &ImageBuf, msg: &BitMessage, key: &WatermarkKey) -> Result<()> {
    key.validate()?;
    if [img.width(), img.height()] != key.native {
        return Err(Error::ShapeMismatch(format!(
            "image is {}x{} but the key embeds at {}x{}",
            img.width(),
            img.height(),
            key.native[0],
            key.native[1]
        )));
    }
    if msg.len() != key.k {
        return Err(Error::BadMessage(format!(
            "message holds {} bits but the key expects {}",
            msg.len(),
            key.k
        )));
    }
    Ok(())
}

fn check_extract_args(img: &ImageBuf, key: &WatermarkKey) -> Result<()> {
    key.validate()?;
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

fn copy_block(band: &[f64], band_w: usize, bx: usize, by: usize) -> [f64; BLOCK * BLOCK] {
    let mut block = [0.0; BLOCK * BLOCK];
    for row in 0..BLOCK {
        let src = (by * BLOCK + row) * band_w + bx * BLOCK;
        block[row * BLOCK..(row + 1) * BLOCK].copy_from_slice(&band[src..src + BLOCK]);
    }
    block
}

fn paste_block(band: &mut [f64], band_w: usize, bx: usize, by: usize, block: &[f64]) {
    for row in 0..BLOCK {
        let dst = (by * BLOCK + row) * band_w + bx * BLOCK;
        band[dst..dst + BLOCK].copy_from_slice(&block[row * BLOCK..(row + 1) * BLOCK]);
    }
}

/// Runs `edit` over every tile of the chosen sub-band in keyed order and
/// writes the result back into the image.
fn with_band<F>(img: &ImageBuf, key: &WatermarkKey, use_ll: bool, mut edit: F) -> Result<ImageBuf>
where
    F: FnMut(usize, &mut [f64; BLOCK * BLOCK], bool) -> Result<bool>,
{
    let mut yuv = to_yuv(img)?;
    let y = yuv.extract_plane(0)?;
    let mut bands = haar_dwt2(&y)?;
    let (band_w, band_h) = (bands.width, bands.height);
    let plan = block_plan(key, band_w, band_h)?;
    let band = if use_ll { &mut bands.ll } else { &mut bands.hl };
    for (j, &tile) in plan.order.iter().enumerate() {
        let (bx, by) = (tile % plan.blocks_x, tile / plan.blocks_x);
        let mut block = copy_block(band, band_w, bx, by);
        let changed = edit(j % key.k, &mut block, plan.white[j])?;
        if changed {
            paste_block(band, band_w, bx, by, &block);
        }
    }
    let y_marked = haar_idwt2(&bands)?;
    yuv.replace_plane(0, &y_marked)?;
    let mut out = from_yuv(&yuv)?;
    out.clamp_unit();
    Ok(out)
}

/// Reads every tile of the chosen sub-band in keyed order, collecting one
/// signed margin per tile toward bit one (after un-whitening), and folds
/// the round-robin repeats into per-bit votes and scores.
fn decode_band<F>(img: &ImageBuf, key: &WatermarkKey, use_ll: bool, mut read: F) -> Result<Extraction>
where
    F: FnMut(&[f64; BLOCK * BLOCK]) -> Result<f64>,
{
    let yuv = to_yuv(img)?;
    let y = yuv.extract_plane(0)?;
    let bands = haar_dwt2(&y)?;
    let (band_w, band_h) = (bands.width, bands.height);
    let plan = block_plan(key, band_w, band_h)?;
    let band = if use_ll { &bands.ll } else { &bands.hl };
    let mut votes_one = vec![0usize; key.k];
    let mut counts = vec![0usize; key.k];
    let mut margins = vec![0.0f64; key.k];
    for (j, &tile) in plan.order.iter().enumerate() {
        let (bx, by) = (tile % plan.blocks_x, tile / plan.blocks_x);
        let block = copy_block(band, band_w, bx, by);
        let mut margin = read(&block)?;
        if plan.white[j] {
            margin = -margin;
        }
        let bit = j % key.k;
        if margin > 0.0 {
            votes_one[bit] += 1;
        }
        counts[bit] += 1;
        margins[bit] += margin;
    }
    let mut decoded = Vec::with_capacity(key.k);
    let mut scores = Vec::with_capacity(key.k);
    for i in 0..key.k {
        let bit = 2 * votes_one[i] > counts[i];
        let raw = margins[i] / counts[i] as f64;
        decoded.push(bit);
        scores.push(if bit { raw } else { -raw });
    }
    Ok(Extraction { message: BitMessage::from_bits(decoded)?, scores })
}

/// Signed coefficient difference the pair scheme decodes from one block.
fn pair_difference(block: &[f64]) -> f64 {
    let a = block[PAIR_A.1 * BLOCK + PAIR_A.0];
    let b = block[PAIR_B.1 * BLOCK + PAIR_B.0];
    a - b
}

/// Embeds `msg` by ordering a mid-frequency DCT coefficient pair in each
/// HL-band block. Blocks already satisfying their margin are untouched.
pub fn dwt_dct_embed(img: &ImageBuf, msg: &BitMessage, key: &WatermarkKey) -> Result<ImageBuf> {
    check_embed_args(img, msg, key)?;
    with_band(img, key, false, |bit_idx, block, white| {
        let want_one = msg.bits()[bit_idx] ^ white;
        let coeffs = dct2_block(block)?;
        let d = pair_difference(&coeffs);
        let satisfied = if want_one { d >= key.margin } else { d <= -key.margin };
        if satisfied {
            return Ok(false);
        }
        let mut coeffs = coeffs;
        let a = coeffs[PAIR_A.1 * BLOCK + PAIR_A.0];
        let b = coeffs[PAIR_B.1 * BLOCK + PAIR_B.0];
        let mean = (a + b) / 2.0;
        let sign = if want_one { 1.0 } else { -1.0 };
        coeffs[PAIR_A.1 * BLOCK + PAIR_A.0] = mean + sign * key.margin / 2.0;
        coeffs[PAIR_B.1 * BLOCK + PAIR_B.0] = mean - sign * key.margin / 2.0;
        *block = idct2_block(&coeffs)?;
        Ok(true)
    })
}

/// Decodes the coefficient-pair payload; per-block margins are normalized
/// by the key margin so a cleanly embedded block scores about 1.
pub fn dwt_dct_extract(img: &ImageBuf, key: &WatermarkKey) -> Result<Extraction> {
    check_extract_args(img, key)?;
    decode_band(img, key, false, |block| {
        let coeffs = dct2_block(block)?;
        Ok(pair_difference(&coeffs) / key.margin)
    })
}

/// Nearest lattice point of the requested parity for a singular value.
fn sigma_target(sigma: f64, bit: bool, step: f64) -> f64 {
    if bit {
        let n = (sigma / step - 0.5).round().max(0.0);
        (n + 0.5) * step
    } else {
        (sigma / step).round().max(0.0) * step
    }
}

/// Embeds `msg` by quantizing the leading singular value of each LL-band
/// block. The block is rescaled as a whole, which moves every singular
/// value by the same factor and therefore cannot reorder them.
pub fn dwt_dct_svd_embed(img: &ImageBuf, msg: &BitMessage, key: &WatermarkKey) -> Result<ImageBuf> {
    check_embed_args(img, msg, key)?;
    with_band(img, key, true, |bit_idx, block, white| {
        let want_one = msg.bits()[bit_idx] ^ white;
        let (_, s, _) = svd_small(block, BLOCK)?;
        let sigma = s[0];
        let target = sigma_target(sigma, want_one, key.sigma_step);
        if (target - sigma).abs() < 1e-12 {
            return Ok(false);
        }
        if sigma > 1e-9 {
            let scale = target / sigma;
            for v in block.iter_mut() {
                *v *= scale;
            }
        } else {
            // Degenerate all-zero tile: synthesize a rank-1 flat block
            // with the required leading singular value.
            let fill = target / BLOCK as f64;
            block.fill(fill);
        }
        Ok(true)
    })
}

/// Decodes the singular-value payload; margins are in half-step units so
/// a cleanly embedded block scores about 1.
pub fn dwt_dct_svd_extract(img: &ImageBuf, key: &WatermarkKey) -> Result<Extraction> {
    check_extract_args(img, key)?;
    let half = key.sigma_step / 2.0;
    decode_band(img, key, true, |block| {
        let (_, s, _) = svd_small(block, BLOCK)?;
        let u = s[0] / half;
        let d_even = (u - 2.0 * (u / 2.0).round()).abs();
        let d_odd = (u - (2.0 * ((u - 1.0) / 2.0).round() + 1.0)).abs();
        Ok(d_even - d_odd)
    })
}
