#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use simid::{Channel, DistortionMatrix, Pmf};

// Reference values evaluated independently with 30-digit arithmetic (mpmath).
pub const H_TERNARY: f64 = 0.921928094887362347870319429489; // H([.8, .1, .1])
pub const BOUND_QUARTER: f64 = 0.180336880111120425919990585125;
/// `1 - h(1/2 - D)` at D = 0.05, 0.1, 0.2, 0.3.
pub const BINARY_SYMMETRIC: [(f64, f64); 4] = [
    (0.05, 0.00722554601219170634769529576279),
    (0.1, 0.0290494055453313610019239368793),
    (0.2, 0.118709100769307381775180775757),
    (0.3, 0.278071905112637652129680570511),
];

pub fn random_pmf(rng: &mut ChaCha8Rng, k: usize, floor: f64) -> Pmf {
    let w: Vec<f64> = (0..k).map(|_| floor + rng.gen::<f64>()).collect();
    Pmf::from_weights(w).unwrap()
}

pub fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Channel {
    let rows = (0..rows)
        .map(|_| {
            let w: Vec<f64> = (0..cols).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        })
        .collect();
    Channel::from_rows(rows).unwrap()
}

/// Random matrix with zero diagonal and entries in `[lo, hi]` off it.
pub fn random_distortion(rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> DistortionMatrix {
    let rows = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { 0.0 } else { rng.gen_range(lo..=hi) })
                .collect()
        })
        .collect();
    DistortionMatrix::new(rows).unwrap()
}

pub fn hamming(k: usize) -> DistortionMatrix {
    DistortionMatrix::hamming(k).unwrap()
}

pub fn pmf(v: &[f64]) -> Pmf {
    Pmf::new(v.to_vec()).unwrap()
}
