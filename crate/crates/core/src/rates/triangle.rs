//! Rates of the two triangle-inequality schemes.
//!
//! A reconstruction `x_hat` is stored together with `d(x_hat, x)`, and a
//! query is rejected when `d(x_hat, y) > d(x_hat, x) + D`. Distortions between
//! reconstruction and source are therefore taken as `rho(x_hat, x)`, which
//! only matters for asymmetric measures.

use serde::Serialize;

use crate::info::{entropy, Channel, DistortionMatrix, Pmf};
use crate::solver::{
    check_tolerance, max_score_at_rate, min_mi_linear_constraint, LinearScore, SolverReport,
};
use crate::{Error, Result};

/// Weight of `E[rho(X_hat, Y)]` in the secondary distortion-rate pass.
const TIE_BREAK_WEIGHT: f64 = 1e-4;
/// Coarse rate grid used to locate the first crossing in [`r_id_lc`].
const LC_COARSE_POINTS: usize = 32;
const LC_BISECTIONS: usize = 40;

/// `m(x_hat) = sum_y py(y) rho(x_hat, y)`, the mean distortion to an
/// independent query.
pub fn constant_query_distortion(py: &Pmf, rho: &DistortionMatrix) -> Result<Vec<f64>> {
    if py.len() != rho.cols() {
        return Err(Error::DimensionMismatch {
            what: "query pmf vs distortion columns",
            expected: rho.cols(),
            got: py.len(),
        });
    }
    Ok((0..rho.rows())
        .map(|xh| rho.row(xh).iter().zip(py.probs()).map(|(r, p)| r * p).sum())
        .collect())
}

/// `D_0` when `m(x_hat)` is the same for every `x_hat` (to `1e-12`).
pub fn constant_d0(py: &Pmf, rho: &DistortionMatrix) -> Result<Option<f64>> {
    let m = constant_query_distortion(py, rho)?;
    let (lo, hi) = m
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    Ok((hi - lo <= 1e-12).then_some(m[0]))
}

fn check_inputs(px: &Pmf, py: &Pmf, rho: &DistortionMatrix, tol: f64) -> Result<Vec<f64>> {
    check_tolerance(tol)?;
    rho.require_triangle()?;
    if px.len() != rho.rows() {
        return Err(Error::DimensionMismatch {
            what: "source pmf vs distortion rows",
            expected: rho.rows(),
            got: px.len(),
        });
    }
    constant_query_distortion(py, rho)
}

/// `s(x, x_hat) = m(x_hat) - rho(x_hat, x)`, row-major in `x`.
fn tc_table(rho: &DistortionMatrix, m: &[f64]) -> Vec<f64> {
    let n = rho.rows();
    let mut c = Vec::with_capacity(n * n);
    for x in 0..n {
        for xh in 0..n {
            c.push(m[xh] - rho.get(xh, x));
        }
    }
    c
}

/// `R_TC(d) = min I(X; X_hat)` subject to `E[rho(X_hat, Y)] - E[rho(X_hat, X)] >= d`.
pub fn r_id_tc(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    d: f64,
    tol: f64,
) -> Result<SolverReport> {
    let m = check_inputs(px, py, rho, tol)?;
    let n = rho.rows();
    let score = LinearScore::from_flat(n, n, tc_table(rho, &m), d)?;
    min_mi_linear_constraint(px, &score, n, tol)
}

/// A triangle-scheme similarity threshold at a given rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleThreshold {
    pub d: f64,
    /// Reconstruction channel `P(x_hat | x)`.
    pub channel: Channel,
    /// `I(X; X_hat)` of the channel.
    pub rate: f64,
    /// `E[rho(X_hat, Y)]` under the channel's reconstruction marginal.
    pub query_distortion: f64,
    /// `E[rho(X_hat, X)]` under the channel.
    pub source_distortion: f64,
}

fn evaluate(
    px: &Pmf,
    rho: &DistortionMatrix,
    m: &[f64],
    ch: Channel,
    rate: f64,
    d: f64,
) -> Result<TriangleThreshold> {
    let marginal = ch.output_marginal(px)?;
    let query_distortion = marginal.probs().iter().zip(m).map(|(p, m)| p * m).sum();
    let source_distortion = ch.expectation(px, &rho.transpose().to_rows().concat())?;
    Ok(TriangleThreshold {
        d,
        channel: ch,
        rate,
        query_distortion,
        source_distortion,
    })
}

/// `D_TC(r) = max E[rho(X_hat, Y)] - E[rho(X_hat, X)]` over channels with
/// `I(X; X_hat) <= r`.
pub fn d_id_tc(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    r: f64,
    tol: f64,
) -> Result<TriangleThreshold> {
    let m = check_inputs(px, py, rho, tol)?;
    let rep = max_score_at_rate(px, &tc_table(rho, &m), rho.rows(), r, tol)?;
    evaluate(px, rho, &m, rep.channel, rep.rate, rep.score)
}

/// `D_LC(r) = E[rho(X_hat, Y)] - D(r)` for a distortion-rate achiever.
///
/// Among near-achievers the one with larger `E[rho(X_hat, Y)]` is preferred:
/// a second pass maximizes `-rho(x_hat, x) + 1e-4 m(x_hat)` at the same rate
/// and is kept if its distortion stays within `tol` of `D(r)`.
pub fn d_id_lc(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    r: f64,
    tol: f64,
) -> Result<TriangleThreshold> {
    let m = check_inputs(px, py, rho, tol)?;
    let n = rho.rows();
    // rho'(x, x_hat) = rho(x_hat, x).
    let mut base = Vec::with_capacity(n * n);
    for x in 0..n {
        for xh in 0..n {
            base.push(-rho.get(xh, x));
        }
    }
    let first = max_score_at_rate(px, &base, n, r, tol)?;
    let d_of_r = -first.score;
    let tilted: Vec<f64> = base
        .iter()
        .enumerate()
        .map(|(i, c)| c + TIE_BREAK_WEIGHT * m[i % n])
        .collect();
    let second = max_score_at_rate(px, &tilted, n, r, tol)?;
    let second_distortion = -second.channel.expectation(px, &base)?;
    let (ch, rate) = if second_distortion <= d_of_r + tol {
        (second.channel, second.rate)
    } else {
        (first.channel, first.rate)
    };
    let mut t = evaluate(px, rho, &m, ch, rate, 0.0)?;
    t.d = t.query_distortion - d_of_r;
    Ok(t)
}

/// Result of [`r_id_lc`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcRate {
    /// Bits; `None` when no rate reaches the threshold.
    pub rate: Option<f64>,
    pub at: Option<TriangleThreshold>,
}

/// Smallest rate `r` with `D_LC(r) >= d`: a coarse scan of `[0, H(X)]` finds
/// the first crossing, then bisection refines it to `tol`.
pub fn r_id_lc(px: &Pmf, py: &Pmf, rho: &DistortionMatrix, d: f64, tol: f64) -> Result<LcRate> {
    check_inputs(px, py, rho, tol)?;
    let at0 = d_id_lc(px, py, rho, 0.0, tol)?;
    if at0.d >= d {
        return Ok(LcRate {
            rate: Some(0.0),
            at: Some(at0),
        });
    }
    let r_max = entropy(px);
    let mut prev = 0.0;
    for k in 1..=LC_COARSE_POINTS {
        let r = r_max * k as f64 / LC_COARSE_POINTS as f64;
        let t = d_id_lc(px, py, rho, r, tol)?;
        if t.d >= d {
            let (mut lo, mut hi, mut best) = (prev, r, t);
            for _ in 0..LC_BISECTIONS {
                if hi - lo <= tol / 4.0 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let tm = d_id_lc(px, py, rho, mid, tol)?;
                if tm.d >= d {
                    hi = mid;
                    best = tm;
                } else {
                    lo = mid;
                }
            }
            return Ok(LcRate {
                rate: Some(hi),
                at: Some(best),
            });
        }
        prev = r;
    }
    Ok(LcRate {
        rate: None,
        at: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lc_full_rate_on_uniform_binary() {
        let h = DistortionMatrix::hamming(2).unwrap();
        let u = pmf(&[0.5, 0.5]);
        let t = d_id_lc(&u, &u, &h, 1.0, 1e-4).unwrap();
        assert!((t.d - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tc_full_rate_is_d0() {
        let h = DistortionMatrix::hamming(3).unwrap();
        let u = Pmf::uniform(3).unwrap();
        let t = d_id_tc(&pmf(&[0.6, 0.3, 0.1]), &u, &h, 3f64.log2(), 1e-4).unwrap();
        assert!((t.d - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn triangle_violation_is_rejected() {
        let sq = DistortionMatrix::new(vec![
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 1.0],
            vec![4.0, 1.0, 0.0],
        ])
        .unwrap();
        let u = Pmf::uniform(3).unwrap();
        assert_eq!(
            d_id_lc(&u, &u, &sq, 0.5, 1e-4).unwrap_err(),
            Error::TriangleViolation(0, 1, 2)
        );
        assert!(r_id_tc(&u, &u, &sq, 0.1, 1e-4).is_err());
    }

    #[test]
    fn d0_detection() {
        let h = DistortionMatrix::hamming(3).unwrap();
        assert_eq!(
            constant_d0(&Pmf::uniform(3).unwrap(), &h).unwrap(),
            Some(2.0 / 3.0)
        );
        assert_eq!(constant_d0(&pmf(&[0.8, 0.1, 0.1]), &h).unwrap(), None);
    }
}
