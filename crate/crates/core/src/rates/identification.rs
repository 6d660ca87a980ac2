use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::patterns::{
    distinct_columns, enumerate_sign_patterns, linear_score_of_pattern, SignPattern,
};
use crate::info::{Channel, DistortionMatrix, Pmf, PointStatus};
use crate::solver::{check_tolerance, min_mi_linear_constraint, LinearScore, SolverStatus};
use crate::transport::{dual_vertices, rho_bar, rho_bar_hamming, DualVertex};
use crate::{Error, Result};

/// Largest number of vertex assignments [`r_id_general_with`] will solve.
pub const ASSIGNMENT_BUDGET: u128 = 2_000_000;

/// Which linear piece of `rho_bar(., P_Y)` each `u` uses.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Pattern(SignPattern),
    Vertices(Vec<DualVertex>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdRateResult {
    /// Bits; `None` when every subproblem is infeasible (infinite rate).
    pub rate: Option<f64>,
    pub status: PointStatus,
    pub achieving_channel: Option<Channel>,
    pub winning_pattern: Option<Winner>,
    /// Index of the winning subproblem in enumeration order.
    pub pattern_index: Option<usize>,
    /// Optimal value of each subproblem, `None` where infeasible.
    pub per_pattern_values: Vec<Option<f64>>,
    pub u_cardinality_used: usize,
    pub kkt_residual: f64,
}

impl IdRateResult {
    fn zero(x_size: usize, u_size: usize) -> Self {
        Self {
            rate: Some(0.0),
            status: PointStatus::ConstraintInactive,
            achieving_channel: Some(Channel::constant(x_size, u_size, 0)),
            winning_pattern: None,
            pattern_index: None,
            per_pattern_values: Vec::new(),
            u_cardinality_used: u_size,
            kkt_residual: 0.0,
        }
    }

    fn infeasible(u_size: usize, per_pattern_values: Vec<Option<f64>>) -> Self {
        Self {
            rate: None,
            status: PointStatus::Infeasible,
            achieving_channel: None,
            winning_pattern: None,
            pattern_index: None,
            per_pattern_values,
            u_cardinality_used: u_size,
            kkt_residual: 0.0,
        }
    }
}

/// Solves every subproblem and keeps the smallest rate, ties to the lowest
/// index.
fn min_over<W: Clone + Send + Sync>(
    px: &Pmf,
    problems: Vec<(W, LinearScore)>,
    u_size: usize,
    tol: f64,
    wrap: impl Fn(W) -> Winner,
) -> Result<IdRateResult> {
    let reports = problems
        .par_iter()
        .map(|(_, s)| min_mi_linear_constraint(px, s, u_size, tol))
        .collect::<Result<Vec<_>>>()?;
    let per: Vec<Option<f64>> = reports
        .iter()
        .map(|r| (r.status != SolverStatus::Infeasible).then_some(r.optimal_rate))
        .collect();
    let best = per
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, b)) if b <= v => acc,
            _ => Some((i, v)),
        });
    let Some((i, rate)) = best else {
        return Ok(IdRateResult::infeasible(u_size, per));
    };
    let rep = &reports[i];
    let status = match rep.status {
        SolverStatus::ConstraintInactive => PointStatus::ConstraintInactive,
        _ => PointStatus::Optimal,
    };
    Ok(IdRateResult {
        rate: Some(rate),
        status,
        achieving_channel: Some(rep.channel.clone()),
        winning_pattern: Some(wrap(problems[i].0.clone())),
        pattern_index: Some(i),
        per_pattern_values: per,
        u_cardinality_used: u_size,
        kkt_residual: rep.kkt_residual,
    })
}

/// Identification rate for Hamming distortion by the sign-pattern
/// decomposition: the minimum over patterns `f` of
/// `min I(X;U)` subject to `L_f >= 2 d`.
///
/// `u_size` above `2^|X| - 2` is reduced to that value; more columns would
/// repeat a pattern column and can be merged without loss.
pub fn r_id_hamming(px: &Pmf, py: &Pmf, d: f64, u_size: usize, tol: f64) -> Result<IdRateResult> {
    check_tolerance(tol)?;
    if px.len() != py.len() {
        return Err(Error::DimensionMismatch {
            what: "source and query alphabets",
            expected: px.len(),
            got: py.len(),
        });
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::Domain(format!(
            "Hamming threshold {d} outside [0, 1]"
        )));
    }
    if u_size == 0 {
        return Err(Error::Domain("u_size must be positive".into()));
    }
    let x_size = px.len();
    if d <= rho_bar_hamming(px, py)? {
        return Ok(IdRateResult::zero(x_size, u_size));
    }
    if x_size == 1 {
        return Ok(IdRateResult::infeasible(u_size, Vec::new()));
    }
    let k = (u_size as u128).min(distinct_columns(x_size)) as usize;
    let problems = enumerate_sign_patterns(x_size, k)?
        .map(|f| {
            let mut s = linear_score_of_pattern(&f, px, py)?;
            s.threshold = 2.0 * d;
            Ok((f, s))
        })
        .collect::<Result<Vec<_>>>()?;
    min_over(px, problems, k, tol, Winner::Pattern)
}

/// How vertex assignments are enumerated in [`r_id_general_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Assignments {
    /// Sets of distinct, undominated pieces, one per `u`.
    #[default]
    Combinations,
    /// Every map from `U` into the full vertex list.
    FullEnumeration,
}

/// Drops pieces whose per-letter gains are dominated by another piece.
fn undominated(vertices: Vec<DualVertex>) -> Vec<DualVertex> {
    let gains: Vec<Vec<f64>> = vertices.iter().map(DualVertex::gains).collect();
    let dominated = |i: usize| {
        (0..gains.len()).any(|j| {
            j != i
                && gains[j].iter().zip(&gains[i]).all(|(a, b)| a >= b)
                && (gains[j] != gains[i] || j < i)
        })
    };
    let keep: Vec<bool> = (0..gains.len()).map(|i| !dominated(i)).collect();
    vertices
        .into_iter()
        .zip(keep)
        .filter_map(|(v, k)| k.then_some(v))
        .collect()
}

/// Identification rate for a general distortion measure using the dual
/// vertices of `rho_bar(., py)`.
pub fn r_id_general(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    d: f64,
    u_size: usize,
    tol: f64,
) -> Result<IdRateResult> {
    r_id_general_with(px, py, rho, d, u_size, tol, Assignments::Combinations)
}

pub fn r_id_general_with(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    d: f64,
    u_size: usize,
    tol: f64,
    mode: Assignments,
) -> Result<IdRateResult> {
    check_tolerance(tol)?;
    if !(0.0..=rho.rho_max()).contains(&d) {
        return Err(Error::Domain(format!(
            "threshold {d} outside [0, {}]",
            rho.rho_max()
        )));
    }
    if u_size == 0 {
        return Err(Error::Domain("u_size must be positive".into()));
    }
    let (bar, _) = rho_bar(px, py, rho)?;
    if d <= bar {
        return Ok(IdRateResult::zero(px.len(), u_size));
    }
    let vertices = dual_vertices(rho, py)?;
    let x_size = px.len();
    let score_of = |assign: &[usize], pieces: &[DualVertex]| -> Result<LinearScore> {
        let k = assign.len();
        let mut c = vec![0.0; x_size * k];
        for (u, &v) in assign.iter().enumerate() {
            for (x, g) in pieces[v].gains().into_iter().enumerate() {
                c[x * k + u] = g;
            }
        }
        LinearScore::from_flat(x_size, k, c, d)
    };
    let (pieces, assignments, k): (Vec<DualVertex>, Vec<Vec<usize>>, usize) = match mode {
        Assignments::Combinations => {
            let pieces = undominated(vertices);
            let k = u_size.min(pieces.len());
            check_budget(super::patterns::binomial(pieces.len() as u128, k as u128))?;
            let a = (0..pieces.len()).combinations(k).collect();
            (pieces, a, k)
        }
        Assignments::FullEnumeration => {
            check_budget((vertices.len() as u128).saturating_pow(u_size as u32))?;
            let a = (0..u_size)
                .map(|_| 0..vertices.len())
                .multi_cartesian_product()
                .collect();
            (vertices, a, u_size)
        }
    };
    let problems = assignments
        .into_iter()
        .map(|a| {
            let s = score_of(&a, &pieces)?;
            Ok((a, s))
        })
        .collect::<Result<Vec<_>>>()?;
    min_over(px, problems, k, tol, |a: Vec<usize>| {
        Winner::Vertices(a.iter().map(|&v| pieces[v].clone()).collect())
    })
}

fn check_budget(count: u128) -> Result<()> {
    if count > ASSIGNMENT_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{count} vertex assignments exceed {ASSIGNMENT_BUDGET}"
        )));
    }
    Ok(())
}

/// Dispatches to [`r_id_hamming`] for Hamming matrices and to
/// [`r_id_general`] otherwise.
pub fn r_id(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    d: f64,
    u_size: usize,
    tol: f64,
) -> Result<IdRateResult> {
    if rho.is_hamming() {
        r_id_hamming(px, py, d, u_size, tol)
    } else {
        r_id_general(px, py, rho, d, u_size, tol)
    }
}
