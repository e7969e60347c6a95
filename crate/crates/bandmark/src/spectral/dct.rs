//! Orthonormal 8x8 type-II DCT and its type-III inverse.
//!
//! Basis scaling c(0)=sqrt(1/8), c(u)=sqrt(2/8) makes the transform
//! orthonormal, which coincides with the block transform used by JPEG's
//! reference quantization path: a constant block c produces a DC
//! coefficient of 8c.

use super::{Error, Result};

pub const BLOCK: usize = 8;
const BLOCK_LEN: usize = BLOCK * BLOCK;

/// Cosine basis, row u = c(u) * cos((2i+1) u pi / 16).
fn basis() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: std::sync::OnceLock<[[f64; BLOCK]; BLOCK]> = std::sync::OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (u, row) in m.iter_mut().enumerate() {
            let scale = if u == 0 { (1.0 / BLOCK as f64).sqrt() } else { (2.0 / BLOCK as f64).sqrt() };
            for (i, v) in row.iter_mut().enumerate() {
                *v = scale
                    * ((2 * i + 1) as f64 * u as f64 * std::f64::consts::PI / (2.0 * BLOCK as f64))
                        .cos();
            }
        }
        m
    })
}

fn check_len(block: &[f64]) -> Result<()> {
    if block.len() != BLOCK_LEN {
        return Err(Error::ShapeMismatch(format!(
            "dct block must hold {BLOCK_LEN} samples (8x8), got {}",
            block.len()
        )));
    }
    Ok(())
}

/// Forward 2-D DCT of a row-major 8x8 block.
pub fn dct2_block(block: &[f64]) -> Result<[f64; BLOCK_LEN]> {
    check_len(block)?;
    let c = basis();
    // Rows: tmp[u][j] = sum_i c[u][i] * x[i][j], applied along x.
    let mut tmp = [0.0; BLOCK_LEN];
    for y in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for i in 0..BLOCK {
                acc += c[u][i] * block[y * BLOCK + i];
            }
            tmp[y * BLOCK + u] = acc;
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for v in 0..BLOCK {
        for u in 0..BLOCK {
            let mut acc = 0.0;
            for j in 0..BLOCK {
                acc += c[v][j] * tmp[j * BLOCK + u];
            }
            out[v * BLOCK + u] = acc;
        }
    }
    Ok(out)
}

/// Inverse 2-D DCT (type-III) of a row-major 8x8 coefficient block.
pub fn idct2_block(coefs: &[f64]) -> Result<[f64; BLOCK_LEN]> {
    check_len(coefs)?;
    let c = basis();
    let mut tmp = [0.0; BLOCK_LEN];
    for v in 0..BLOCK {
        for i in 0..BLOCK {
            let mut acc = 0.0;
            for u in 0..BLOCK {
                acc += c[u][i] * coefs[v * BLOCK + u];
            }
            tmp[v * BLOCK + i] = acc;
        }
    }
    let mut out = [0.0; BLOCK_LEN];
    for j in 0..BLOCK {
        for i in 0..BLOCK {
            let mut acc = 0.0;
            for v in 0..BLOCK {
                acc += c[v][j] * tmp[v * BLOCK + i];
            }
            out[j * BLOCK + i] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_block(seed: u64) -> [f64; BLOCK_LEN] {
        let mut state = seed;
        let mut out = [0.0; BLOCK_LEN];
        for v in &mut out {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *v = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        }
        out
    }

    #[test]
    fn constant_block_concentrates_at_dc() {
        let coefs = dct2_block(&[0.25; BLOCK_LEN]).unwrap();
        assert!((coefs[0] - 8.0 * 0.25).abs() < 1e-12);
        assert!(coefs[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn roundtrip_is_exact() {
        let block = pseudo_block(17);
        let back = idct2_block(&dct2_block(&block).unwrap()).unwrap();
        for (a, b) in block.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_coefficient_realizes_its_basis_image() {
        let (u, v) = (3, 1);
        let mut coefs = [0.0; BLOCK_LEN];
        coefs[v * BLOCK + u] = 1.0;
        let px = idct2_block(&coefs).unwrap();
        let cu = (2.0 / 8.0f64).sqrt();
        let cv = (2.0 / 8.0f64).sqrt();
        for j in 0..BLOCK {
            for i in 0..BLOCK {
                let expect = cu
                    * cv
                    * ((2 * i + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()
                    * ((2 * j + 1) as f64 * v as f64 * std::f64::consts::PI / 16.0).cos();
                assert!((px[j * BLOCK + i] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_preserves_energy() {
        let block = pseudo_block(4);
        let coefs = dct2_block(&block).unwrap();
        let e_block: f64 = block.iter().map(|v| v * v).sum();
        let e_coef: f64 = coefs.iter().map(|v| v * v).sum();
        assert!((e_block - e_coef).abs() < 1e-10);
    }

    #[test]
    fn wrong_block_size_is_rejected() {
        assert!(dct2_block(&[0.0; 16]).is_err());
        assert!(idct2_block(&[0.0; 100]).is_err());
    }
}
