//! Signatures and the triangle-inequality decision rule.
//!
//! The signature of `x` is the index of its nearest codeword `x_hat` together
//! with `d(x_hat, x)`. A query `y` is answered `no` when
//! `d(x_hat, y) > d(x_hat, x) + D`, which the triangle inequality rules out
//! for every `y` with `d(x, y) <= D`. Distortions are compared as exact
//! totals over the block. A relative slack of `1e-9` absorbs rounding for
//! non-integer measures and always errs towards `maybe`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::codebook::Codebook;
use super::sequence::pack;
use crate::{Error, Result};

/// Largest number of `(x, y)` pairs scanned exhaustively.
pub const EXHAUSTIVE_PAIR_BUDGET: u128 = 1 << 20;
/// Pairs drawn when the exhaustive scan is over budget.
pub const SAMPLED_PAIRS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignatureIndex {
    Codeword(usize),
    Erasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Signature {
    pub index: SignatureIndex,
    /// `sum_i rho(x_hat_i, x_i)`; zero for an erasure.
    pub stored_total: f64,
    pub n: usize,
}

impl Signature {
    /// Per-letter `d(x_hat, x)`, a multiple of `1 / n`.
    pub fn stored_distortion(&self) -> f64 {
        self.stored_total / self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    No,
    Maybe,
}

pub(crate) fn slack(cb: &Codebook) -> f64 {
    1e-9 * (cb.rho_max() * cb.n() as f64).max(1.0)
}

/// Signature of `x`: the distortion-minimizing codeword with the lowest
/// index, or an erasure for atypical `x` in typical-only codebooks.
pub fn assign_signature(x: &[u8], cb: &Codebook) -> Result<Signature> {
    let space = cb.space();
    space.check(x)?;
    Ok(signature_of_index(cb, space.index(x)))
}

pub(crate) fn signature_of_index(cb: &Codebook, index: u64) -> Signature {
    let (c, t) = cb.lookup(index);
    Signature {
        index: c.map_or(SignatureIndex::Erasure, SignatureIndex::Codeword),
        stored_total: t,
        n: cb.n(),
    }
}

/// Signatures of every sequence, in index order.
pub fn signature_table(cb: &Codebook) -> Vec<Signature> {
    (0..cb.space().size() as u64)
        .map(|i| signature_of_index(cb, i))
        .collect()
}

pub(crate) fn decide_packed(sig: &Signature, cb: &Codebook, y: &[u32], d: f64) -> Decision {
    match sig.index {
        SignatureIndex::Erasure => Decision::Maybe,
        SignatureIndex::Codeword(c) => {
            let t = cb.cost().total(cb.packed_codeword(c), y);
            if t > sig.stored_total + d * cb.n() as f64 + slack(cb) {
                Decision::No
            } else {
                Decision::Maybe
            }
        }
    }
}

/// `no` iff the signature is not erased and `d(x_hat, y) > stored + D`.
pub fn decide_triangle(sig: &Signature, cb: &Codebook, y: &[u8], d: f64) -> Result<Decision> {
    let space = cb.space();
    space.check(y)?;
    if sig.n != space.n() {
        return Err(Error::LengthMismatch {
            expected: space.n(),
            got: sig.n,
        });
    }
    if let SignatureIndex::Codeword(c) = sig.index {
        if c >= cb.len() {
            return Err(Error::Domain(format!("codeword index {c} out of range")));
        }
    }
    Ok(decide_packed(sig, cb, &pack(y, space.alphabet()), d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub mode: ScanMode,
    pub pairs_checked: u64,
    /// Pairs with `d(x, y) <= D`.
    pub similar_pairs: u64,
    /// First similar pair answered `no`.
    pub witness: Option<(Vec<u8>, Vec<u8>)>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Checks that no pair with `d(x, y) <= D` is answered `no`, using the
/// codebook's own signatures.
pub fn exhaustive_admissibility_check(
    cb: &Codebook,
    d: f64,
    seed: u64,
) -> Result<AdmissibilityReport> {
    admissibility_check_with(cb, &signature_table(cb), d, seed)
}

/// As [`exhaustive_admissibility_check`] with an explicit signature per
/// sequence index. Spaces with more than [`EXHAUSTIVE_PAIR_BUDGET`] pairs are
/// checked on [`SAMPLED_PAIRS`] random pairs, where `y` is `x` with a random
/// number of positions redrawn.
pub fn admissibility_check_with(
    cb: &Codebook,
    signatures: &[Signature],
    d: f64,
    seed: u64,
) -> Result<AdmissibilityReport> {
    let space = cb.space();
    let size = space.size();
    if signatures.len() as u128 != size {
        return Err(Error::DimensionMismatch {
            what: "signature table vs sequence space",
            expected: size as usize,
            got: signatures.len(),
        });
    }
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("threshold {d} must be >= 0")));
    }
    let k = space.alphabet();
    let limit = d * space.n() as f64 + slack(cb) / 2.0;
    let mut report = AdmissibilityReport {
        mode: ScanMode::Exhaustive,
        pairs_checked: 0,
        similar_pairs: 0,
        witness: None,
    };
    let check = |xi: u64, yi: u64, xp: &[u32], yp: &[u32], report: &mut AdmissibilityReport| {
        report.pairs_checked += 1;
        if cb.cost().total(xp, yp) > limit {
            return;
        }
        report.similar_pairs += 1;
        if report.witness.is_none()
            && decide_packed(&signatures[xi as usize], cb, yp, d) == Decision::No
        {
            report.witness = Some((space.sequence(xi), space.sequence(yi)));
        }
    };
    if size * size <= EXHAUSTIVE_PAIR_BUDGET {
        let packed: Vec<Vec<u32>> = (0..size as u64)
            .map(|i| pack(&space.sequence(i), k))
            .collect();
        for (xi, xp) in packed.iter().enumerate() {
            for (yi, yp) in packed.iter().enumerate() {
                check(xi as u64, yi as u64, xp, yp, &mut report);
            }
        }
    } else {
        report.mode = ScanMode::Sampled;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = space.n();
        for _ in 0..SAMPLED_PAIRS {
            let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..k) as u8).collect();
            let mut y = x.clone();
            let flips = rng.gen_range(0..=n);
            for _ in 0..flips {
                let i = rng.gen_range(0..n);
                y[i] = rng.gen_range(0..k) as u8;
            }
            let (xi, yi) = (space.index(&x), space.index(&y));
            check(xi, yi, &pack(&x, k), &pack(&y, k), &mut report);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::DistortionMatrix;

    fn h2() -> DistortionMatrix {
        DistortionMatrix::hamming(2).unwrap()
    }

    #[test]
    fn all_zeros_picks_all_zeros_codeword() {
        let cb = Codebook::from_codewords(8, vec![vec![0; 8], vec![1; 8]], &h2()).unwrap();
        let s = assign_signature(&[0; 8], &cb).unwrap();
        assert_eq!(s.index, SignatureIndex::Codeword(0));
        assert_eq!(s.stored_distortion(), 0.0);
        // Equidistant: lowest index wins.
        let s = assign_signature(&[0, 0, 0, 0, 1, 1, 1, 1], &cb).unwrap();
        assert_eq!(s.index, SignatureIndex::Codeword(0));
        assert_eq!(s.stored_distortion(), 0.5);
    }

    #[test]
    fn boundary_is_maybe_and_beyond_is_no() {
        let cb = Codebook::from_codewords(8, vec![vec![0; 8]], &h2()).unwrap();
        let x = [1, 0, 0, 0, 0, 0, 0, 0];
        let s = assign_signature(&x, &cb).unwrap();
        assert_eq!(s.stored_distortion(), 0.125);
        let y2 = [0, 1, 1, 0, 0, 0, 0, 0];
        assert_eq!(
            decide_triangle(&s, &cb, &y2, 0.125).unwrap(),
            Decision::Maybe
        );
        let y3 = [1, 1, 1, 0, 0, 0, 0, 0];
        assert_eq!(decide_triangle(&s, &cb, &y3, 0.125).unwrap(), Decision::No);
        assert_eq!(
            decide_triangle(&s, &cb, &[0; 8], 0.0).unwrap(),
            Decision::Maybe
        );
        assert!(decide_triangle(&s, &cb, &[0; 7], 0.1).is_err());
    }

    #[test]
    fn erasure_is_always_maybe() {
        let cb = Codebook::from_codewords(4, vec![vec![0; 4]], &h2()).unwrap();
        let s = Signature {
            index: SignatureIndex::Erasure,
            stored_total: 0.0,
            n: 4,
        };
        assert_eq!(
            decide_triangle(&s, &cb, &[1; 4], 0.0).unwrap(),
            Decision::Maybe
        );
    }

    #[test]
    fn lowered_stored_distortion_yields_witness() {
        let cb = Codebook::from_codewords(6, vec![vec![0; 6], vec![1; 6]], &h2()).unwrap();
        assert!(exhaustive_admissibility_check(&cb, 0.25, 0)
            .unwrap()
            .passed());
        let mut sigs = signature_table(&cb);
        for s in &mut sigs {
            if s.stored_total >= 1.0 {
                s.stored_total -= 1.0;
            }
        }
        let rep = admissibility_check_with(&cb, &sigs, 0.25, 0).unwrap();
        assert!(!rep.passed());
        let (x, y) = rep.witness.unwrap();
        assert!(x.iter().zip(&y).filter(|(a, b)| a != b).count() as f64 <= 0.25 * 6.0);
    }
}
