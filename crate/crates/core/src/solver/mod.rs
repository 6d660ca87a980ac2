//! Minimum mutual information under one linear constraint on the channel:
//!
//! ```text
//! minimize I(X;U)  over W(u|x)  subject to  sum_{x,u} p(x) W(u|x) c(x,u) >= t
//! ```
//!
//! Solved in Lagrangian form. For a multiplier `lambda >= 0` the Blahut-Arimoto
//! iteration (see [`ba`]) minimizes `I - lambda * score`; an outer bisection on
//! `lambda` brackets the threshold and the two bracketing channels are mixed
//! so that the score equals `t` exactly. Because `I` is convex in the channel,
//! the mixture's rate is an upper bound on the optimum, and every inner run
//! gives the certified lower bound `G(q) - log2 max_u k(u) + lambda * t`. The
//! search stops when the two meet within `tol / 2`.

mod ba;
mod oracle;

use serde::Serialize;

use crate::info::{mutual_information_raw, Channel, DistortionMatrix, Pmf, PROB_FLOOR};
use crate::{Error, Result};

pub use oracle::{grid_oracle, ORACLE_BUDGET};

/// Largest accepted solver tolerance (bits).
pub const MAX_TOL: f64 = 1e-2;
const INNER_MAX_ITER: usize = 100_000;
const OUTER_MAX_ITER: usize = 200;
const LAMBDA_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60
/// Score slack treated as equality with the analytic maximum.
const SCORE_EPS: f64 = 1e-12;

/// Score table `c(x, u)` with the constraint `E[c(X, U)] >= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearScore {
    rows: usize,
    cols: usize,
    c: Vec<f64>,
    pub threshold: f64,
}

impl LinearScore {
    pub fn new(table: Vec<Vec<f64>>, threshold: f64) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Domain("empty score table".into()));
        }
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::Domain("ragged score table".into()));
        }
        Self::from_flat(rows, cols, table.concat(), threshold)
    }

    pub fn from_flat(rows: usize, cols: usize, c: Vec<f64>, threshold: f64) -> Result<Self> {
        if c.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "score table entries",
                expected: rows * cols,
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) || !threshold.is_finite() {
            return Err(Error::Domain("score entries must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            c,
            threshold,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.c[x * self.cols + u]
    }

    pub fn table(&self) -> &[f64] {
        &self.c
    }

    /// `sum_{x,u} px(x) W(u|x) c(x,u)`.
    pub fn value(&self, px: &Pmf, ch: &Channel) -> Result<f64> {
        ch.expectation(px, &self.c)
    }

    /// `sum_x px(x) max_u c(x,u)`, the largest achievable score.
    pub fn max_score(&self, px: &Pmf) -> f64 {
        px.probs()
            .iter()
            .zip(self.c.chunks(self.cols))
            .map(|(p, row)| p * row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }

    /// `max_u sum_x px(x) c(x,u)`, the best score of a constant channel.
    pub fn best_constant_score(&self, px: &Pmf) -> f64 {
        (0..self.cols)
            .map(|u| {
                (0..self.rows)
                    .map(|x| px.get(x) * self.get(x, u))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Optimal,
    ConstraintInactive,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    /// Bits; `+inf` only together with [`SolverStatus::Infeasible`].
    pub optimal_rate: f64,
    /// The achieving channel. For an infeasible program, the channel
    /// attaining the largest score.
    pub channel: Channel,
    /// Final multiplier; `+inf` when the threshold equals the maximal score.
    pub lambda: f64,
    pub iterations: usize,
    /// Certified duality gap: reported rate minus the best lower bound.
    pub kkt_residual: f64,
    pub converged: bool,
    /// Achieved score minus threshold.
    pub constraint_slack: f64,
    pub status: SolverStatus,
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= MAX_TOL {
        Ok(())
    } else {
        Err(Error::BadTolerance(tol))
    }
}

/// The program restricted to letters of positive probability.
struct Reduced {
    full_rows: usize,
    keep: Vec<usize>,
    px: Vec<f64>,
    c: Vec<f64>,
    cols: usize,
    cmax: Vec<f64>,
    smax: f64,
    best_u: usize,
    best_score: f64,
}

impl Reduced {
    fn new(px: &Pmf, c: &[f64], cols: usize) -> Self {
        let keep: Vec<usize> = (0..px.len()).filter(|&x| px.get(x) > PROB_FLOOR).collect();
        let total: f64 = keep.iter().map(|&x| px.get(x)).sum();
        let p: Vec<f64> = keep.iter().map(|&x| px.get(x) / total).collect();
        let mut cr = Vec::with_capacity(keep.len() * cols);
        for &x in &keep {
            cr.extend_from_slice(&c[x * cols..(x + 1) * cols]);
        }
        let cmax: Vec<f64> = cr
            .chunks(cols)
            .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let smax = p.iter().zip(&cmax).map(|(p, m)| p * m).sum();
        let (mut best_u, mut best_score) = (0, f64::NEG_INFINITY);
        for u in 0..cols {
            let s: f64 = p
                .iter()
                .enumerate()
                .map(|(i, p)| p * cr[i * cols + u])
                .sum();
            if s > best_score {
                best_u = u;
                best_score = s;
            }
        }
        Self {
            full_rows: px.len(),
            keep,
            px: p,
            c: cr,
            cols,
            cmax,
            smax,
            best_u,
            best_score,
        }
    }

    /// Reinstates dropped letters with uniform rows.
    fn expand(&self, w: &[f64]) -> Channel {
        let mut full = vec![1.0 / self.cols as f64; self.full_rows * self.cols];
        for (i, &x) in self.keep.iter().enumerate() {
            full[x * self.cols..(x + 1) * self.cols]
                .copy_from_slice(&w[i * self.cols..(i + 1) * self.cols]);
        }
        Channel::from_flat_normalizing(self.full_rows, self.cols, full)
    }

    fn constant(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.px.len() * self.cols];
        for row in w.chunks_mut(self.cols) {
            row[self.best_u] = 1.0;
        }
        w
    }

    /// Deterministic channel onto the lowest-index row maximizer.
    fn pointwise_argmax(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.px.len() * self.cols];
        for (x, row) in self.c.chunks(self.cols).enumerate() {
            let u = row.iter().position(|&v| v == self.cmax[x]).unwrap_or(0);
            w[x * self.cols + u] = 1.0;
        }
        w
    }

    fn uniform_q(&self) -> Vec<f64> {
        vec![1.0 / self.cols as f64; self.cols]
    }

    fn run(&self, lambda: f64, q0: &[f64], tol: f64) -> ba::BaRun {
        let a = ba::tilt(&self.c, self.cols, &self.cmax, lambda);
        ba::run(
            &self.px,
            &self.c,
            &a,
            self.cols,
            q0,
            tol / 10.0,
            INNER_MAX_ITER,
        )
    }

    fn run_masked(&self, tol: f64) -> ba::BaRun {
        let a = ba::argmax_mask(&self.c, self.cols, &self.cmax);
        ba::run(
            &self.px,
            &self.c,
            &a,
            self.cols,
            &self.uniform_q(),
            tol / 10.0,
            INNER_MAX_ITER,
        )
    }
}

/// One point `(I, score)` of the Lagrangian path with its channel.
struct PathPoint {
    lambda: f64,
    w: Vec<f64>,
    q: Vec<f64>,
    rate: f64,
    score: f64,
}

impl PathPoint {
    fn from_run(lambda: f64, r: ba::BaRun) -> Self {
        Self {
            lambda,
            w: r.w,
            q: r.q,
            rate: r.rate,
            score: r.score,
        }
    }
}

fn mix(a: &[f64], b: &[f64], theta: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| theta * x + (1.0 - theta) * y)
        .collect()
}

fn validate(px: &Pmf, rows: usize, cols: usize, u_size: usize, tol: f64) -> Result<()> {
    check_tolerance(tol)?;
    if px.len() != rows {
        return Err(Error::DimensionMismatch {
            what: "source pmf vs score rows",
            expected: rows,
            got: px.len(),
        });
    }
    if u_size == 0 || cols != u_size {
        return Err(Error::DimensionMismatch {
            what: "score columns vs u_size",
            expected: u_size,
            got: cols,
        });
    }
    Ok(())
}

/// `min I(X;U)` subject to `E[c(X,U)] >= threshold` over channels into
/// `u_size` letters, to within `tol` bits.
pub fn min_mi_linear_constraint(
    px: &Pmf,
    score: &LinearScore,
    u_size: usize,
    tol: f64,
) -> Result<SolverReport> {
    validate(px, score.rows, score.cols, u_size, tol)?;
    let red = Reduced::new(px, &score.c, score.cols);
    let t = score.threshold;

    if t > red.smax + SCORE_EPS {
        return Ok(SolverReport {
            optimal_rate: f64::INFINITY,
            channel: red.expand(&red.pointwise_argmax()),
            lambda: f64::INFINITY,
            iterations: 0,
            kkt_residual: 0.0,
            converged: true,
            constraint_slack: red.smax - t,
            status: SolverStatus::Infeasible,
        });
    }
    if red.best_score >= t {
        return Ok(SolverReport {
            optimal_rate: 0.0,
            channel: red.expand(&red.constant()),
            lambda: 0.0,
            iterations: 0,
            kkt_residual: 0.0,
            converged: true,
            constraint_slack: red.best_score - t,
            status: SolverStatus::ConstraintInactive,
        });
    }
    if t >= red.smax - SCORE_EPS {
        let r = red.run_masked(tol);
        let residual = (r.rate - r.lower).max(0.0);
        return Ok(SolverReport {
            optimal_rate: r.rate,
            channel: red.expand(&r.w),
            lambda: f64::INFINITY,
            iterations: r.iterations,
            kkt_residual: residual,
            converged: residual <= tol,
            constraint_slack: r.score - t,
            status: SolverStatus::Optimal,
        });
    }

    let mut iterations = 0;
    let mut best_lb = 0.0_f64;
    let mut lo = PathPoint {
        lambda: 0.0,
        w: red.constant(),
        q: red.uniform_q(),
        rate: 0.0,
        score: red.best_score,
    };
    let record = |r: &ba::BaRun, lambda: f64, iters: &mut usize, lb: &mut f64| {
        *iters += r.iterations;
        *lb = lb.max(r.lower - lambda * (red.smax - t));
    };

    // Grow the bracket until the tilted channel meets the threshold.
    let mut lambda = 1.0;
    let mut q = red.uniform_q();
    let hi = loop {
        let r = red.run(lambda, &q, tol);
        record(&r, lambda, &mut iterations, &mut best_lb);
        let p = PathPoint::from_run(lambda, r);
        if p.score >= t {
            break p;
        }
        q = p.q.clone();
        lo = p;
        lambda *= 2.0;
        if lambda > LAMBDA_CAP {
            let r = red.run_masked(tol);
            iterations += r.iterations;
            break PathPoint::from_run(f64::INFINITY, r);
        }
    };
    let mut hi = hi;

    let mut outer = 0;
    loop {
        let theta = ((t - lo.score) / (hi.score - lo.score)).clamp(0.0, 1.0);
        let w = mix(&hi.w, &lo.w, theta);
        let rate = mutual_information_raw(&red.px, &w, red.cols);
        let gap = (rate - best_lb).max(0.0);
        outer += 1;
        let done = gap <= tol / 2.0
            || outer >= OUTER_MAX_ITER
            || !hi.lambda.is_finite()
            || hi.lambda - lo.lambda <= 1e-15 * hi.lambda;
        if done {
            let s = ba::expected_score(&red.px, &w, &red.c, red.cols);
            return Ok(SolverReport {
                optimal_rate: rate,
                channel: red.expand(&w),
                lambda: 0.5 * (lo.lambda + hi.lambda),
                iterations,
                kkt_residual: gap,
                converged: gap <= tol,
                constraint_slack: s - t,
                status: SolverStatus::Optimal,
            });
        }
        let mid = 0.5 * (lo.lambda + hi.lambda);
        let r = red.run(mid, &hi.q, tol);
        record(&r, mid, &mut iterations, &mut best_lb);
        let p = PathPoint::from_run(mid, r);
        if p.score >= t {
            hi = p;
        } else {
            lo = p;
        }
    }
}

/// Result of [`max_score_at_rate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateScoreReport {
    /// Score of the returned channel.
    pub score: f64,
    /// Certified upper bound on the maximal score at this rate.
    pub upper_bound: f64,
    pub channel: Channel,
    /// `I(X;U)` of the returned channel, at most the requested rate.
    pub rate: f64,
    pub lambda: f64,
    pub iterations: usize,
}

/// `max E[c(X,U)]` subject to `I(X;U) <= r`, the inverse view of
/// [`min_mi_linear_constraint`]. The returned channel has `I <= r` and a
/// score within `tol` of the maximum.
pub fn max_score_at_rate(
    px: &Pmf,
    table: &[f64],
    u_size: usize,
    r: f64,
    tol: f64,
) -> Result<RateScoreReport> {
    if table.len() != px.len() * u_size {
        return Err(Error::DimensionMismatch {
            what: "score table entries",
            expected: px.len() * u_size,
            got: table.len(),
        });
    }
    validate(px, px.len(), u_size, u_size, tol)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("rate {r} must be nonnegative")));
    }
    let red = Reduced::new(px, table, u_size);
    let constant = |red: &Reduced| RateScoreReport {
        score: red.best_score,
        upper_bound: red.smax,
        channel: red.expand(&red.constant()),
        rate: 0.0,
        lambda: 0.0,
        iterations: 0,
    };
    if red.best_score >= red.smax - SCORE_EPS {
        return Ok(constant(&red));
    }

    let masked = red.run_masked(tol);
    let mut iterations = masked.iterations;
    if masked.rate <= r {
        return Ok(RateScoreReport {
            score: masked.score,
            upper_bound: red.smax,
            channel: red.expand(&masked.w),
            rate: masked.rate,
            lambda: f64::INFINITY,
            iterations,
        });
    }
    if r == 0.0 {
        let mut rep = constant(&red);
        rep.iterations = iterations;
        return Ok(rep);
    }

    let mut upper = red.smax;
    let bound = |run: &ba::BaRun, lambda: f64| red.smax + (r - run.lower) / lambda;
    let mut lo = PathPoint {
        lambda: 0.0,
        w: red.constant(),
        q: red.uniform_q(),
        rate: 0.0,
        score: red.best_score,
    };
    let mut lambda = 1.0;
    let mut q = red.uniform_q();
    let hi = loop {
        let run = red.run(lambda, &q, tol);
        iterations += run.iterations;
        upper = upper.min(bound(&run, lambda));
        let p = PathPoint::from_run(lambda, run);
        if p.rate >= r {
            break p;
        }
        q = p.q.clone();
        lo = p;
        lambda *= 2.0;
        if lambda > LAMBDA_CAP {
            break PathPoint::from_run(f64::INFINITY, red.run_masked(tol));
        }
    };

    let mut hi = hi;
    let mut outer = 0;
    loop {
        let theta = if hi.rate > lo.rate {
            ((r - lo.rate) / (hi.rate - lo.rate)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let score = theta * hi.score + (1.0 - theta) * lo.score;
        outer += 1;
        let done = upper - score <= tol / 2.0
            || outer >= OUTER_MAX_ITER
            || !hi.lambda.is_finite()
            || hi.lambda - lo.lambda <= 1e-15 * hi.lambda;
        if done {
            let w = mix(&hi.w, &lo.w, theta);
            let rate = mutual_information_raw(&red.px, &w, red.cols);
            let score = ba::expected_score(&red.px, &w, &red.c, red.cols);
            return Ok(RateScoreReport {
                score,
                upper_bound: upper.max(score),
                channel: red.expand(&w),
                rate,
                lambda: 0.5 * (lo.lambda + hi.lambda),
                iterations,
            });
        }
        let mid = 0.5 * (lo.lambda + hi.lambda);
        let run = red.run(mid, &hi.q, tol);
        iterations += run.iterations;
        upper = upper.min(bound(&run, mid));
        let p = PathPoint::from_run(mid, run);
        if p.rate >= r {
            hi = p;
        } else {
            lo = p;
        }
    }
}

fn negated(rho: &DistortionMatrix) -> Vec<f64> {
    (0..rho.rows())
        .flat_map(|x| rho.row(x).iter().map(|v| -v))
        .collect()
}

/// Classical `R(d) = min I(X; X_hat)` subject to `E[rho(X, X_hat)] <= d`.
pub fn rate_distortion(px: &Pmf, rho: &DistortionMatrix, d: f64, tol: f64) -> Result<SolverReport> {
    if !(0.0..=rho.rho_max()).contains(&d) {
        return Err(Error::Domain(format!(
            "distortion {d} outside [0, {}]",
            rho.rho_max()
        )));
    }
    let score = LinearScore::from_flat(rho.rows(), rho.cols(), negated(rho), -d)?;
    min_mi_linear_constraint(px, &score, rho.cols(), tol)
}

/// `D(r)` with an achieving channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionRate {
    pub d_of_r: f64,
    /// Certified lower bound on `D(r)`.
    pub lower_bound: f64,
    pub achieving_channel: Channel,
    /// `I(X; X_hat)` of the achieving channel.
    pub rate: f64,
}

/// Classical distortion-rate function `D(r) = min E[rho(X, X_hat)]` subject
/// to `I(X; X_hat) <= r`.
pub fn distortion_rate(
    px: &Pmf,
    rho: &DistortionMatrix,
    r: f64,
    tol: f64,
) -> Result<DistortionRate> {
    if px.len() != rho.rows() {
        return Err(Error::DimensionMismatch {
            what: "source pmf vs distortion rows",
            expected: rho.rows(),
            got: px.len(),
        });
    }
    let rep = max_score_at_rate(px, &negated(rho), rho.cols(), r, tol)?;
    Ok(DistortionRate {
        d_of_r: -rep.score,
        lower_bound: -rep.upper_bound,
        achieving_channel: rep.channel,
        rate: rep.rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{binary_entropy, binary_entropy_inverse, entropy};

    // 1 - h2(0.1), evaluated with 30-digit arithmetic.
    const RD_HALF_01: f64 = 0.531004406410718778746410669617;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn inactive_and_infeasible() {
        let px = pmf(&[0.5, 0.5]);
        let s = LinearScore::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.5).unwrap();
        let r = min_mi_linear_constraint(&px, &s, 2, 1e-4).unwrap();
        assert_eq!(r.status, SolverStatus::ConstraintInactive);
        assert_eq!(r.optimal_rate, 0.0);
        let s = LinearScore::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1.0 + 1e-6).unwrap();
        let r = min_mi_linear_constraint(&px, &s, 2, 1e-4).unwrap();
        assert_eq!(r.status, SolverStatus::Infeasible);
    }

    #[test]
    fn identity_forcing_threshold_gives_entropy() {
        let px = pmf(&[0.7, 0.2, 0.1]);
        let s = LinearScore::new(
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            1.0,
        )
        .unwrap();
        let r = min_mi_linear_constraint(&px, &s, 3, 1e-4).unwrap();
        assert!((r.optimal_rate - entropy(&px)).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_arguments() {
        let px = pmf(&[0.5, 0.5]);
        let s = LinearScore::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.7).unwrap();
        assert_eq!(
            min_mi_linear_constraint(&px, &s, 2, 0.0),
            Err(Error::BadTolerance(0.0))
        );
        assert_eq!(
            min_mi_linear_constraint(&px, &s, 2, 0.02),
            Err(Error::BadTolerance(0.02))
        );
        assert!(min_mi_linear_constraint(&px, &s, 3, 1e-4).is_err());
        assert!(min_mi_linear_constraint(&pmf(&[1.0]), &s, 2, 1e-4).is_err());
    }

    #[test]
    fn binary_rate_distortion() {
        let h = DistortionMatrix::hamming(2).unwrap();
        let px = pmf(&[0.5, 0.5]);
        let r = rate_distortion(&px, &h, 0.1, 1e-5).unwrap();
        assert_eq!(r.status, SolverStatus::Optimal);
        assert!(
            (r.optimal_rate - RD_HALF_01).abs() < 1e-5,
            "{}",
            r.optimal_rate
        );
        assert!(r.kkt_residual <= 1e-5);
        assert!(r.constraint_slack.abs() < 1e-8);

        let r = rate_distortion(&pmf(&[0.8, 0.2]), &h, 0.2, 1e-4).unwrap();
        assert_eq!(r.optimal_rate, 0.0);
        let r = rate_distortion(&pmf(&[0.8, 0.2]), &h, 0.0, 1e-4).unwrap();
        assert!((r.optimal_rate - binary_entropy(0.2)).abs() < 1e-4);
        let p = pmf(&[0.7, 0.3]);
        let r = rate_distortion(&p, &h, 0.05, 1e-4).unwrap();
        let exact = binary_entropy(0.3) - binary_entropy(0.05);
        assert!((r.optimal_rate - exact).abs() < 1e-4);
    }

    #[test]
    fn binary_distortion_rate() {
        let h = DistortionMatrix::hamming(2).unwrap();
        let px = pmf(&[0.5, 0.5]);
        let d = distortion_rate(&px, &h, 0.5, 1e-5).unwrap();
        let exact = binary_entropy_inverse(0.5).unwrap();
        assert!((d.d_of_r - exact).abs() < 1e-5, "{}", d.d_of_r);
        assert!(d.rate <= 0.5 + 1e-12);
        assert!(d.lower_bound <= exact + 1e-12);

        assert!(distortion_rate(&px, &h, 1.0, 1e-4).unwrap().d_of_r.abs() < 1e-12);
        let d = distortion_rate(&pmf(&[0.8, 0.2]), &h, 0.0, 1e-4).unwrap();
        assert!((d.d_of_r - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_letters_get_uniform_rows() {
        let px = pmf(&[0.5, 0.0, 0.5]);
        let h = DistortionMatrix::hamming(3).unwrap();
        let r = rate_distortion(&px, &h, 0.1, 1e-4).unwrap();
        assert_eq!(r.channel.row(1), &[1.0 / 3.0; 3]);
        assert!((r.optimal_rate - (1.0 - binary_entropy(0.1))).abs() < 2e-4);
    }
}
