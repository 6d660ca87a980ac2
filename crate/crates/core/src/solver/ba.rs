//! Blahut-Arimoto iteration for a fixed tilting matrix.
//!
//! With `A(x,u) = 2^{lambda (c(x,u) - cmax(x))}` the iteration is
//! `Z(x) = sum_u q(u) A(x,u)`, `k(u) = sum_x p(x) A(x,u) / Z(x)`,
//! `q <- q * k`. It minimizes `G(q) = -sum_x p(x) log2 Z(x)` and
//! `G(q) - log2 max_u k(u)` bounds the minimum from below.

use crate::info::mutual_information_raw;

/// Floor for marginal weights so that `Z(x)` stays positive.
const Q_FLOOR: f64 = 1e-250;

pub(crate) struct BaRun {
    pub q: Vec<f64>,
    pub w: Vec<f64>,
    pub rate: f64,
    pub score: f64,
    /// `G(q) - log2 max_u k(u)`, excluding the `lambda * cmax` shift.
    pub lower: f64,
    pub iterations: usize,
}

/// Tilting matrix for multiplier `lambda`.
pub(crate) fn tilt(c: &[f64], cols: usize, cmax: &[f64], lambda: f64) -> Vec<f64> {
    let mut a = Vec::with_capacity(c.len());
    for (x, row) in c.chunks(cols).enumerate() {
        a.extend(row.iter().map(|&v| (lambda * (v - cmax[x])).exp2()));
    }
    a
}

/// Indicator of the per-row maximizers, the `lambda -> infinity` limit.
pub(crate) fn argmax_mask(c: &[f64], cols: usize, cmax: &[f64]) -> Vec<f64> {
    let mut a = Vec::with_capacity(c.len());
    for (x, row) in c.chunks(cols).enumerate() {
        a.extend(
            row.iter()
                .map(|&v| if v >= cmax[x] - 1e-12 { 1.0 } else { 0.0 }),
        );
    }
    a
}

pub(crate) fn run(
    px: &[f64],
    c: &[f64],
    a: &[f64],
    cols: usize,
    q0: &[f64],
    gap_tol: f64,
    max_iter: usize,
) -> BaRun {
    let rows = px.len();
    let mut q = q0.to_vec();
    let mut z = vec![0.0; rows];
    let mut k = vec![0.0; cols];
    let mut iterations = 0;
    loop {
        for x in 0..rows {
            let ar = &a[x * cols..(x + 1) * cols];
            z[x] = ar
                .iter()
                .zip(&q)
                .map(|(a, q)| a * q)
                .sum::<f64>()
                .max(f64::MIN_POSITIVE);
        }
        k.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..rows {
            let s = px[x] / z[x];
            for (kv, av) in k.iter_mut().zip(&a[x * cols..(x + 1) * cols]) {
                *kv += s * av;
            }
        }
        let kmax = k.iter().copied().fold(0.0, f64::max);
        if kmax.log2() <= gap_tol || iterations >= max_iter {
            break;
        }
        let mut total = 0.0;
        for (qv, kv) in q.iter_mut().zip(&k) {
            *qv *= kv;
            total += *qv;
        }
        for qv in q.iter_mut() {
            *qv = (*qv / total).max(Q_FLOOR);
        }
        iterations += 1;
    }
    let g: f64 = -px.iter().zip(&z).map(|(p, z)| p * z.log2()).sum::<f64>();
    let lower = g - k.iter().copied().fold(0.0, f64::max).log2();

    let mut w = vec![0.0; rows * cols];
    for x in 0..rows {
        let row = &mut w[x * cols..(x + 1) * cols];
        for u in 0..cols {
            row[u] = q[u] * a[x * cols + u] / z[x];
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    let rate = mutual_information_raw(px, &w, cols);
    let score = expected_score(px, &w, c, cols);
    BaRun {
        q,
        w,
        rate,
        score,
        lower,
        iterations,
    }
}

pub(crate) fn expected_score(px: &[f64], w: &[f64], c: &[f64], cols: usize) -> f64 {
    px.iter()
        .enumerate()
        .map(|(x, p)| {
            p * w[x * cols..(x + 1) * cols]
                .iter()
                .zip(&c[x * cols..(x + 1) * cols])
                .map(|(w, c)| w * c)
                .sum::<f64>()
        })
        .sum()
}
