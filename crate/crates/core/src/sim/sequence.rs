//! Sequences over a small alphabet.
//!
//! A sequence of length `n <= 32` is packed as one `u32` per letter: bit `i`
//! of mask `a` is set when the `i`-th symbol is `a`. Joint types and additive
//! distortions then reduce to popcounts.

use crate::info::DistortionMatrix;
use crate::{Error, Result};

pub const MAX_BLOCKLENGTH: usize = 32;
pub const MAX_ALPHABET: usize = 16;

/// All `alphabet^n` sequences of length `n`, indexed in base `alphabet`
/// with position 0 as the least significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceSpace {
    alphabet: usize,
    n: usize,
}

impl SequenceSpace {
    pub fn new(alphabet: usize, n: usize) -> Result<Self> {
        if !(1..=MAX_ALPHABET).contains(&alphabet) || !(1..=MAX_BLOCKLENGTH).contains(&n) {
            return Err(Error::Domain(format!(
                "need 1 <= |X| <= {MAX_ALPHABET} and 1 <= n <= {MAX_BLOCKLENGTH}, got {alphabet}, {n}"
            )));
        }
        Ok(Self { alphabet, n })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u128 {
        (self.alphabet as u128).pow(self.n as u32)
    }

    pub fn sequence(&self, mut index: u64) -> Vec<u8> {
        let k = self.alphabet as u64;
        (0..self.n)
            .map(|_| {
                let a = index % k;
                index /= k;
                a as u8
            })
            .collect()
    }

    pub fn check(&self, seq: &[u8]) -> Result<()> {
        if seq.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: seq.len(),
            });
        }
        if let Some(i) = seq.iter().position(|&a| a as usize >= self.alphabet) {
            return Err(Error::Domain(format!(
                "symbol {} at position {i} outside alphabet of size {}",
                seq[i], self.alphabet
            )));
        }
        Ok(())
    }

    /// Caller guarantees `seq` passed [`SequenceSpace::check`].
    pub fn index(&self, seq: &[u8]) -> u64 {
        seq.iter()
            .rev()
            .fold(0u64, |acc, &a| acc * self.alphabet as u64 + a as u64)
    }
}

/// Letter masks of `seq`, appended to `out`.
pub fn pack_into(seq: &[u8], alphabet: usize, out: &mut Vec<u32>) {
    let start = out.len();
    out.resize(start + alphabet, 0);
    for (i, &a) in seq.iter().enumerate() {
        out[start + a as usize] |= 1 << i;
    }
}

pub fn pack(seq: &[u8], alphabet: usize) -> Vec<u32> {
    let mut v = Vec::with_capacity(alphabet);
    pack_into(seq, alphabet, &mut v);
    v
}

/// Letter counts of a packed sequence.
pub fn type_counts(masks: &[u32]) -> Vec<usize> {
    masks.iter().map(|m| m.count_ones() as usize).collect()
}

/// Additive distortion between packed sequences. Totals are kept unnormalized
/// so that integer-valued measures stay exact.
#[derive(Debug, Clone)]
pub struct SequenceCost {
    alphabet: usize,
    rho: Vec<f64>,
}

impl SequenceCost {
    pub fn new(rho: &DistortionMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::InvalidDistortion(
                "sequence distortion needs a square matrix".into(),
            ));
        }
        Ok(Self {
            alphabet: rho.rows(),
            rho: rho.to_rows().concat(),
        })
    }

    /// `sum_i rho(a_i, b_i)`, summed over letter pairs in a fixed order.
    pub fn total(&self, a: &[u32], b: &[u32]) -> f64 {
        let k = self.alphabet;
        let mut t = 0.0;
        for i in 0..k {
            for j in 0..k {
                let r = self.rho[i * k + j];
                if r != 0.0 {
                    t += r * (a[i] & b[j]).count_ones() as f64;
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let s = SequenceSpace::new(3, 5).unwrap();
        for i in [0u64, 1, 17, 242] {
            assert_eq!(s.index(&s.sequence(i)), i);
        }
        assert_eq!(s.sequence(1), vec![1, 0, 0, 0, 0]);
        assert!(s.check(&[0, 1, 3, 0, 0]).is_err());
        assert!(s.check(&[0, 1]).is_err());
    }

    #[test]
    fn hamming_total_is_mismatch_count() {
        let cost = SequenceCost::new(&DistortionMatrix::hamming(3).unwrap()).unwrap();
        let a = pack(&[0, 1, 2, 2, 1], 3);
        let b = pack(&[0, 2, 2, 1, 1], 3);
        assert_eq!(cost.total(&a, &b), 2.0);
        assert_eq!(type_counts(&a), vec![1, 2, 2]);
    }
}
