//! Fixed-length bit messages and their hex wire form.

use crate::error::{Error, Result};
use rand::Rng;

/// A payload of `k` bits, ordered most-significant-first.
///
/// The hex form packs bits MSB-first into `ceil(k / 4)` nibbles; when `k` is
/// not a multiple of four the trailing pad bits of the last nibble must be
/// zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMessage {
    bits: Vec<bool>,
}

impl BitMessage {
    /// Wraps an explicit bit vector. Errors on an empty message.
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::BadMessage("message must contain at least one bit".into()));
        }
        Ok(Self { bits })
    }

    /// Draws `k` uniform random bits from `rng`.
    pub fn random<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadMessage("message must contain at least one bit".into()));
        }
        Ok(Self { bits: (0..k).map(|_| rng.random::<bool>()).collect() })
    }

    /// Parses `ceil(k / 4)` hex nibbles into a `k`-bit message.
    ///
    /// Both hex cases are accepted on input; pad bits beyond `k` must be zero.
    pub fn from_hex(s: &str, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadMessage("message must contain at least one bit".into()));
        }
        let nibbles = k.div_ceil(4);
        if s.len() != nibbles {
            return Err(Error::BadMessage(format!(
                "expected {} hex digits for {} bits, got {}",
                nibbles,
                k,
                s.len()
            )));
        }
        let mut bits = Vec::with_capacity(nibbles * 4);
        for ch in s.chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::BadMessage(format!("invalid hex digit {ch:?}")))?;
            for shift in (0..4).rev() {
                bits.push((v >> shift) & 1 == 1);
            }
        }
        for (i, &bit) in bits.iter().enumerate().skip(k) {
            if bit {
                return Err(Error::BadMessage(format!(
                    "pad bit {} past the {}-bit payload is set",
                    i, k
                )));
            }
        }
        bits.truncate(k);
        Ok(Self { bits })
    }

    /// Encodes the message as lowercase hex, zero-padding the last nibble.
    pub fn to_hex(&self) -> String {
        let nibbles = self.bits.len().div_ceil(4);
        let mut out = String::with_capacity(nibbles);
        for n in 0..nibbles {
            let mut v = 0u32;
            for shift in 0..4 {
                let idx = n * 4 + shift;
                let bit = self.bits.get(idx).copied().unwrap_or(false);
                v = (v << 1) | u32::from(bit);
            }
            out.push(char::from_digit(v, 16).unwrap());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Returns the message with every bit inverted.
    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| !b).collect() }
    }
}
