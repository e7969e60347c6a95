//! Singular value decomposition for small square matrices via one-sided
//! Jacobi rotations. Intended for the 8x8 blocks used by the SVD-based
//! embedder; sizes above 8 are rejected.

use super::{Error, Result};

const MAX_N: usize = 8;
const TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

// Columns whose squared norm falls below this fraction of the largest
// squared column norm are numerically zero: their direction is rounding
// residue, so rotating against them can dither forever without ever
// passing the relative convergence test. They are skipped and surface as
// zero singular values.
const ZERO_COL_REL: f64 = 1e-27;

/// Decomposes a row-major n x n matrix into (U, S, V) with
/// m = U * diag(S) * V^T and S sorted nonincreasing.
///
/// U and V come back row-major. Columns whose singular value underflows to
/// zero get a unit-basis fill-in in U; they carry no energy, so the
/// reconstruction identity still holds.
pub fn svd_small(m: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if n == 0 || n > MAX_N {
        return Err(Error::ShapeMismatch(format!("svd_small supports 1..={MAX_N}, got n={n}")));
    }
    if m.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "matrix length {} does not match n*n={}",
            m.len(),
            n * n
        )));
    }

    // Column-major working copies: w holds the rotated columns of m,
    // v accumulates the right rotations starting from the identity.
    let col = |src: &[f64], j: usize| -> Vec<f64> { (0..n).map(|i| src[i * n + j]).collect() };
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| col(m, j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        let floor = ZERO_COL_REL
            * w.iter()
                .map(|c| c.iter().map(|x| x * x).sum::<f64>())
                .fold(0.0, f64::max);
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..n {
                    alpha += w[p][i] * w[p][i];
                    beta += w[q][i] * w[q][i];
                    gamma += w[p][i] * w[q][i];
                }
                if alpha <= floor || beta <= floor {
                    continue;
                }
                if gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let (wp, wq) = (w[p][i], w[q][i]);
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                    let (vp, vq) = (v[p][i], v[q][i]);
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { routine: "svd_small jacobi", iterations: MAX_SWEEPS });
    }

    // Singular values are the column norms; normalize into U.
    let mut order: Vec<usize> = (0..n).collect();
    let sigmas: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    order.sort_by(|&a, &b| sigmas[b].partial_cmp(&sigmas[a]).unwrap());

    let mut u_out = vec![0.0; n * n];
    let mut s_out = vec![0.0; n];
    let mut v_out = vec![0.0; n * n];
    for (slot, &j) in order.iter().enumerate() {
        let sigma = sigmas[j];
        s_out[slot] = sigma;
        for i in 0..n {
            let ui = if sigma > 0.0 {
                w[j][i] / sigma
            } else if i == slot {
                1.0
            } else {
                0.0
            };
            u_out[i * n + slot] = ui;
            v_out[i * n + slot] = v[j][i];
        }
    }
    Ok((u_out, s_out, v_out))
}

/// Rebuilds U * diag(S) * V^T, row-major.
pub fn svd_reconstruct(u: &[f64], s: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += u[i * n + k] * s[k] * v[j * n + k];
            }
            out[i * n + j] = acc;
        }
    }
    out
}
