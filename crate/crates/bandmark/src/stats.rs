//! Detection statistics for multi-bit watermarks.
//!
//! A decoder that recovers `M` out of `k` payload bits is compared against a
//! threshold `tau`; the detector fires when `M > tau` (strictly). Under the
//! null hypothesis each recovered bit matches the truth independently with
//! probability `p_o` (0.5 for an uninformed decoder), so `M` is binomial and
//! both error rates reduce to regularized incomplete beta evaluations:
//!
//! `P(M > tau) = I_p(tau + 1, k - tau)`
//!
//! evaluated at `p = p_o` for the false-positive rate and `p = p_w` for the
//! true-positive rate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::watermark::BitMessage;

/// Binomial detection setting: payload length, threshold, and the per-bit
/// match probabilities under the unwatermarked and watermarked hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    pub k: usize,
    pub tau: usize,
    pub p_o: f64,
    pub p_w: f64,
}

impl DetectionParams {
    pub fn new(k: usize, tau: usize, p_o: f64, p_w: f64) -> Result<Self> {
        let params = Self { k, tau, p_o, p_w };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("payload length k must be positive".into()));
        }
        if self.tau > self.k {
            return Err(Error::Domain(format!(
                "threshold tau = {} must lie in [0, k = {}]",
                self.tau, self.k
            )));
        }
        check_probability("p_o", self.p_o)?;
        check_probability("p_w", self.p_w)?;
        Ok(())
    }

    /// False-positive rate of the strict `M > tau` detector.
    pub fn fpr(&self) -> Result<f64> {
        fpr_at_tau(self.k, self.tau, self.p_o)
    }

    /// True-positive rate of the strict `M > tau` detector.
    pub fn tpr(&self) -> Result<f64> {
        tpr_at_tau(self.k, self.tau, self.p_w)
    }
}

/// Outcome of verifying a decoded message against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionResult {
    /// Number of decoded bits equal to the truth.
    pub matched: usize,
    /// Payload length.
    pub k: usize,
    /// Threshold chosen for the requested false-positive target.
    pub tau: usize,
    /// False-positive rate actually achieved at that threshold.
    pub fpr: f64,
    /// Whether the detector fires (`matched > tau`, strictly).
    pub decision: bool,
    /// `matched / k`.
    pub bit_accuracy: f64,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(p.is_finite() && 0.0 < p && p < 1.0) {
        return Err(Error::Domain(format!("{name} must lie strictly in (0, 1), got {p}")));
    }
    Ok(())
}

/// Number of positions where the two equal-length messages agree.
pub fn matching_bits(a: &BitMessage, b: &BitMessage) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "cannot compare a {}-bit message with a {}-bit message",
            a.len(),
            b.len()
        )));
    }
    Ok(a.bits().iter().zip(b.bits()).filter(|(x, y)| x == y).count())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function, Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the approximation on its accurate half-line.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let base = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * base.ln() - base + sum.ln()
}

/// Continued-fraction kernel for the incomplete beta function, evaluated with
/// Lentz's method. Converges quickly only for `p < (a + 1) / (a + b + 2)`;
/// the caller flips to the symmetric case otherwise.
fn beta_cf(p: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-30;
    const EPS: f64 = 1e-15;
    const MAX_ITER: usize = 400;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * p / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * p / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * p / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence { routine: "incomplete beta continued fraction", iterations: MAX_ITER })
}

/// Regularized incomplete beta function `I_p(a, b)`, absolute error below
/// 1e-12 over the detection range used here.
pub fn reg_inc_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) || !(b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!("beta parameters must be positive, got a = {a}, b = {b}")));
    }
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::Domain(format!("beta argument p must lie in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let ln_front =
        a * p.ln() + b * (1.0 - p).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    let front = ln_front.exp();
    if p < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cf(p, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_cf(1.0 - p, b, a)? / b)
    }
}

/// `P(M > tau)` for `M ~ Binomial(k, p_o)`: the false-positive rate of the
/// strict detector at threshold `tau`.
pub fn fpr_at_tau(k: usize, tau: usize, p_o: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("payload length k must be positive".into()));
    }
    if tau > k {
        return Err(Error::Domain(format!("threshold tau = {tau} must lie in [0, k = {k}]")));
    }
    check_probability("p_o", p_o)?;
    if tau == k {
        return Ok(0.0);
    }
    reg_inc_beta(p_o, (tau + 1) as f64, (k - tau) as f64)
}

/// `P(M > tau)` for `M ~ Binomial(k, p_w)`: the true-positive rate of the
/// strict detector at threshold `tau`.
pub fn tpr_at_tau(k: usize, tau: usize, p_w: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("payload length k must be positive".into()));
    }
    if tau > k {
        return Err(Error::Domain(format!("threshold tau = {tau} must lie in [0, k = {k}]")));
    }
    check_probability("p_w", p_w)?;
    if tau == k {
        return Ok(0.0);
    }
    reg_inc_beta(p_w, (tau + 1) as f64, (k - tau) as f64)
}

/// Smallest threshold whose false-positive rate does not exceed `target`.
///
/// Always terminates: the rate at `tau = k` is exactly zero. `target = 1.0`
/// yields `tau = 0`.
pub fn tau_for_target_fpr(k: usize, p_o: f64, target: f64) -> Result<usize> {
    if !(target.is_finite() && 0.0 < target && target <= 1.0) {
        return Err(Error::Domain(format!("target FPR must lie in (0, 1], got {target}")));
    }
    for tau in 0..=k {
        if fpr_at_tau(k, tau, p_o)? <= target {
            return Ok(tau);
        }
    }
    unreachable!("fpr_at_tau(k, k, _) is exactly zero");
}

/// Compares a decoded message against the truth at the threshold calibrated
/// for `target_fpr` under per-bit null match probability `p_o`.
pub fn verify(
    decoded: &BitMessage,
    truth: &BitMessage,
    p_o: f64,
    target_fpr: f64,
) -> Result<DetectionResult> {
    let matched = matching_bits(decoded, truth)?;
    let k = truth.len();
    let tau = tau_for_target_fpr(k, p_o, target_fpr)?;
    let fpr = fpr_at_tau(k, tau, p_o)?;
    Ok(DetectionResult {
        matched,
        k,
        tau,
        fpr,
        decision: matched > tau,
        bit_accuracy: matched as f64 / k as f64,
    })
}
