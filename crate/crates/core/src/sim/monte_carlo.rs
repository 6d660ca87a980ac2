//! Seeded Monte Carlo estimate of the probability of `maybe`.
//!
//! Trials are split into chunks of [`CHUNK`]. Chunk `i` draws from a ChaCha8
//! generator seeded with `seed` on stream `i`, so the estimate does not depend
//! on how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::Codebook;
use super::scheme::{decide_packed, signature_of_index, slack, Decision};
use super::sequence::pack;
use crate::info::Pmf;
use crate::{Error, Result};

pub const CHUNK: u64 = 1024;
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub p_maybe_estimate: f64,
    /// Half-width of the 95% normal-approximation interval.
    pub confidence_halfwidth: f64,
    pub trials: u64,
    pub seed: u64,
    pub maybe_count: u64,
    /// Trials with `d(X, Y) <= D`.
    pub similar_count: u64,
    /// Similar trials answered `no`. Always zero for a correct scheme.
    pub false_negative_count: u64,
    pub n: usize,
    pub rate: f64,
    pub d_threshold: f64,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    maybe: u64,
    similar: u64,
    false_negatives: u64,
}

fn draw(rng: &mut ChaCha8Rng, cdf: &[f64], n: usize) -> Vec<u8> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u8
        })
        .collect()
}

/// Estimates `Pr[g(T(X), Y) = maybe]` for `X ~ px^n`, `Y ~ py^n` independent.
pub fn estimate_maybe_probability(
    cb: &Codebook,
    px: &Pmf,
    py: &Pmf,
    d: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulationResult> {
    let space = cb.space();
    let k = space.alphabet();
    for (what, got) in [
        ("source pmf vs alphabet", px.len()),
        ("query pmf vs alphabet", py.len()),
    ] {
        if got != k {
            return Err(Error::DimensionMismatch {
                what,
                expected: k,
                got,
            });
        }
    }
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("threshold {d} must be >= 0")));
    }
    let n = space.n();
    let (cx, cy) = (px.cdf(), py.cdf());
    let similar_limit = d * n as f64 + slack(cb) / 2.0;
    let chunks = trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut t = Tally::default();
            for _ in 0..count {
                let x = draw(&mut rng, &cx, n);
                let y = draw(&mut rng, &cy, n);
                let sig = signature_of_index(cb, space.index(&x));
                let yp = pack(&y, k);
                let maybe = decide_packed(&sig, cb, &yp, d) == Decision::Maybe;
                t.maybe += maybe as u64;
                if cb.cost().total(&pack(&x, k), &yp) <= similar_limit {
                    t.similar += 1;
                    t.false_negatives += !maybe as u64;
                }
            }
            t
        })
        .reduce(Tally::default, |a, b| Tally {
            maybe: a.maybe + b.maybe,
            similar: a.similar + b.similar,
            false_negatives: a.false_negatives + b.false_negatives,
        });
    let p = tally.maybe as f64 / trials as f64;
    Ok(SimulationResult {
        p_maybe_estimate: p,
        confidence_halfwidth: Z95 * (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
        seed,
        maybe_count: tally.maybe,
        similar_count: tally.similar,
        false_negative_count: tally.false_negatives,
        n,
        rate: cb.rate(),
        d_threshold: d,
    })
}
