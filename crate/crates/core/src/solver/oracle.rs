//! Brute-force upper bound on `min I(X;U)` for validating the solver.
//!
//! All rows but one range over the grid `{k / N}` of the simplex. The last
//! row is taken on the constraint boundary `{w : w . c = tau}`, which is a
//! point (`|U| = 2`) or a segment (`|U| = 3`), and `I` is minimized along it
//! by golden-section search, exact because `I` is convex in each row. When
//! the best constant channel is infeasible the optimum lies on that
//! boundary, so the value is an upper bound within `O(step)` of the optimum.

use super::LinearScore;
use crate::info::{mutual_information_raw, Pmf, PROB_FLOOR};
use crate::{Error, Result};

/// Maximal number of mutual-information evaluations.
pub const ORACLE_BUDGET: u128 = 200_000_000;
const GOLDEN_ITERS: usize = 60;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden(mut f: impl FnMut(f64) -> f64) -> f64 {
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(0.0)).min(f(1.0))
}

/// Endpoints of `{w in simplex : w . c = tau}`; `None` when empty.
fn boundary(c: &[f64], tau: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = c.len();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (ci, cj) = (c[i], c[j]);
            if (ci - tau) * (cj - tau) > 0.0 || ci == cj {
                continue;
            }
            let th = (tau - cj) / (ci - cj);
            let mut w = vec![0.0; k];
            w[i] = th;
            w[j] = 1.0 - th;
            pts.push(w);
        }
    }
    let first = pts.first()?.clone();
    let far = pts
        .iter()
        .max_by(|a, b| {
            let da: f64 = a.iter().zip(&first).map(|(x, y)| (x - y).abs()).sum();
            let db: f64 = b.iter().zip(&first).map(|(x, y)| (x - y).abs()).sum();
            da.total_cmp(&db)
        })
        .unwrap()
        .clone();
    Some((first, far))
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(n: usize, i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.iter().map(|&k| k as f64 / n as f64).collect());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(n, i + 1, left - k, cur, out);
        }
    }
    rec(n, 0, n, &mut cur, &mut out);
    out
}

/// Grid upper bound on `min I(X;U)` subject to the score constraint.
/// Returns `+inf` for an infeasible program and `0` when a constant channel
/// is feasible.
pub fn grid_oracle(px: &Pmf, score: &LinearScore, u_size: usize, step: f64) -> Result<f64> {
    if px.len() != score.rows() || score.cols() != u_size {
        return Err(Error::DimensionMismatch {
            what: "oracle dimensions",
            expected: score.rows(),
            got: px.len(),
        });
    }
    if u_size > 3 || px.len() > 3 || !(step >= 1e-3) || step > 0.5 {
        return Err(Error::Domain(format!(
            "oracle supports |X|, |U| <= 3 and step in [1e-3, 0.5], got {}x{u_size}, {step}",
            px.len()
        )));
    }
    let t = score.threshold;
    if score.max_score(px) < t - 1e-12 {
        return Ok(f64::INFINITY);
    }
    if score.best_constant_score(px) >= t || u_size == 1 {
        return Ok(0.0);
    }

    let rows: Vec<usize> = (0..px.len()).filter(|&x| px.get(x) > PROB_FLOOR).collect();
    let p: Vec<f64> = rows.iter().map(|&x| px.get(x)).collect();
    let spread = |x: usize| {
        let r = &score.table()[x * u_size..(x + 1) * u_size];
        let (lo, hi) = r
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        px.get(x) * (hi - lo)
    };
    let last = (0..rows.len())
        .max_by(|&a, &b| spread(rows[a]).total_cmp(&spread(rows[b])).then(b.cmp(&a)))
        .unwrap();

    let n = (1.0 / step).round() as usize;
    let grid = compositions(n, u_size);
    let free = rows.len() - 1;
    let points = (grid.len() as u128).pow(free as u32) * (GOLDEN_ITERS as u128 + 4);
    if points > ORACLE_BUDGET {
        return Err(Error::TooLarge {
            points,
            budget: ORACLE_BUDGET,
        });
    }

    let c_last: Vec<f64> = score.table()[rows[last] * u_size..(rows[last] + 1) * u_size].to_vec();
    let others: Vec<usize> = (0..rows.len()).filter(|&i| i != last).collect();
    let mut w = vec![0.0; rows.len() * u_size];
    let mut idx = vec![0usize; free];
    let mut best = f64::INFINITY;
    loop {
        let mut s_others = 0.0;
        for (k, &i) in others.iter().enumerate() {
            let row = &grid[idx[k]];
            w[i * u_size..(i + 1) * u_size].copy_from_slice(row);
            let c = &score.table()[rows[i] * u_size..(rows[i] + 1) * u_size];
            s_others += p[i] * row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
        }
        let cmin = c_last.iter().copied().fold(f64::INFINITY, f64::min);
        let cmax = c_last.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut tau = ((t - s_others) / p[last]).max(cmin);
        if tau > cmax && tau <= cmax + 1e-9 {
            tau = cmax;
        }
        if let Some((a, b)) = boundary(&c_last, tau) {
            let v = golden(|s| {
                for u in 0..u_size {
                    w[last * u_size + u] = s * a[u] + (1.0 - s) * b[u];
                }
                mutual_information_raw(&p, &w, u_size)
            });
            best = best.min(v);
        }
        // Odometer over the free rows.
        let mut k = 0;
        while k < free {
            idx[k] += 1;
            if idx[k] < grid.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == free {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::entropy;

    #[test]
    fn trivial_cases() {
        let px = Pmf::new(vec![0.5, 0.5]).unwrap();
        let s = LinearScore::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0.4).unwrap();
        assert_eq!(grid_oracle(&px, &s, 2, 0.01).unwrap(), 0.0);
        let s = LinearScore::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1.5).unwrap();
        assert_eq!(grid_oracle(&px, &s, 2, 0.01).unwrap(), f64::INFINITY);
    }

    #[test]
    fn identity_forcing() {
        let px = Pmf::new(vec![0.6, 0.3, 0.1]).unwrap();
        let id: Vec<Vec<f64>> = (0..3)
            .map(|x| (0..3).map(|u| if x == u { 1.0 } else { 0.0 }).collect())
            .collect();
        let s = LinearScore::new(id, 1.0).unwrap();
        let v = grid_oracle(&px, &s, 3, 0.05).unwrap();
        assert!((v - entropy(&px)).abs() < 1e-12, "{v} vs {}", entropy(&px));
    }

    #[test]
    fn budget_and_domain() {
        let px = Pmf::uniform(3).unwrap();
        let id: Vec<Vec<f64>> = (0..3)
            .map(|x| (0..3).map(|u| if x == u { 1.0 } else { 0.0 }).collect())
            .collect();
        let s = LinearScore::new(id, 0.9).unwrap();
        assert!(matches!(
            grid_oracle(&px, &s, 3, 0.001),
            Err(Error::TooLarge { .. })
        ));
        assert!(grid_oracle(&px, &s, 3, 0.0001).is_err());
    }
}
