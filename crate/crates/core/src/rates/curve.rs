use serde::Serialize;

use super::bounds::hamming_lower_bound;
use super::identification::{r_id_general_with, r_id_hamming, Assignments, IdRateResult};
use super::triangle::{r_id_lc, r_id_tc};
use crate::info::{
    lower_convex_envelope, Channel, CurvePoint, DistortionMatrix, Pmf, PointStatus, RateCurve,
};
use crate::solver::{rate_distortion, SolverReport, SolverStatus};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CurveOptions {
    /// Use `|U| = |X| + 1` and skip the envelope.
    pub strict_cardinality: bool,
    /// Enumerate all vertex maps instead of distinct combinations
    /// (general distortion only).
    pub full_enumeration: bool,
    /// Also compute the `|X| + 1` curve for comparison.
    pub spot_check: bool,
    /// Use the dual-vertex method even for Hamming distortion.
    pub force_general: bool,
    /// Solve at exactly this `|U|` and skip the envelope.
    pub fixed_u_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdCurve {
    /// The reported curve: enveloped `|X|` curve, or the strict curve.
    pub curve: RateCurve,
    pub pre_envelope: RateCurve,
    /// Achieving channel per reported point; `None` where the rate is
    /// infinite or the point was lowered by the envelope.
    pub channels: Vec<Option<Channel>>,
    pub spot_check: Option<RateCurve>,
}

/// A scheme-rate curve with the channel achieving each point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeCurve {
    pub curve: RateCurve,
    pub channels: Vec<Option<Channel>>,
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::TooFewPoints(0));
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonIncreasingGrid(i + 1));
        }
    }
    Ok(())
}

fn id_point(d: f64, r: &IdRateResult, tol: f64) -> CurvePoint {
    CurvePoint {
        d,
        rate: r.rate,
        status: r.status,
        pattern_index: r.pattern_index,
        u_size: r.u_cardinality_used,
        tol,
    }
}

#[allow(clippy::too_many_arguments)]
fn id_curve_at(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    grid: &[f64],
    u_size: usize,
    tol: f64,
    opts: CurveOptions,
    label: &str,
) -> Result<(RateCurve, Vec<Option<Channel>>)> {
    let mode = if opts.full_enumeration {
        Assignments::FullEnumeration
    } else {
        Assignments::Combinations
    };
    let (pts, channels): (Vec<_>, Vec<_>) = grid
        .iter()
        .map(|&d| {
            let r = if rho.is_hamming() && !opts.force_general && !opts.full_enumeration {
                r_id_hamming(px, py, d, u_size, tol)?
            } else {
                r_id_general_with(px, py, rho, d, u_size, tol, mode)?
            };
            Ok((id_point(d, &r, tol), r.achieving_channel))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok((RateCurve::new(label, pts)?, channels))
}

/// Identification rate on a grid, at `|U| = |X|` followed by the lower
/// convex envelope (or at `|X| + 1` without envelope in strict mode).
pub fn r_id_curve(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    grid: &[f64],
    tol: f64,
) -> Result<IdCurve> {
    r_id_curve_with(px, py, rho, grid, tol, CurveOptions::default())
}

pub fn r_id_curve_with(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    grid: &[f64],
    tol: f64,
    opts: CurveOptions,
) -> Result<IdCurve> {
    check_grid(grid)?;
    let n = px.len();
    let unenveloped = match (opts.fixed_u_size, opts.strict_cardinality) {
        (Some(u), _) => Some(u),
        (None, true) => Some(n + 1),
        (None, false) => None,
    };
    if let Some(u) = unenveloped {
        let (c, channels) = id_curve_at(px, py, rho, grid, u, tol, opts, "rid")?;
        return Ok(IdCurve {
            curve: c.clone(),
            pre_envelope: c,
            channels,
            spot_check: None,
        });
    }
    let (pre, pre_channels) = id_curve_at(px, py, rho, grid, n, tol, opts, "rid")?;
    let curve = if pre.len() >= 2 {
        lower_convex_envelope(&pre)?
    } else {
        pre.clone()
    };
    let channels = curve
        .points()
        .iter()
        .zip(pre_channels)
        .map(|(p, ch)| {
            if p.status == PointStatus::Envelope {
                None
            } else {
                ch
            }
        })
        .collect();
    let spot_check = if opts.spot_check {
        Some(id_curve_at(px, py, rho, grid, n + 1, tol, opts, "rid_spot_check")?.0)
    } else {
        None
    };
    Ok(IdCurve {
        curve,
        pre_envelope: pre,
        channels,
        spot_check,
    })
}

fn solver_point(d: f64, r: SolverReport, u_size: usize, tol: f64) -> (CurvePoint, Option<Channel>) {
    let (rate, status) = match r.status {
        SolverStatus::Infeasible => (None, PointStatus::Infeasible),
        SolverStatus::ConstraintInactive => (Some(0.0), PointStatus::ConstraintInactive),
        SolverStatus::Optimal => (Some(r.optimal_rate), PointStatus::Optimal),
    };
    let channel = rate.is_some().then_some(r.channel);
    let pt = CurvePoint {
        d,
        rate,
        status,
        pattern_index: None,
        u_size,
        tol,
    };
    (pt, channel)
}

fn scheme_curve(label: &str, pts: Vec<(CurvePoint, Option<Channel>)>) -> Result<SchemeCurve> {
    let (pts, channels) = pts.into_iter().unzip();
    Ok(SchemeCurve {
        curve: RateCurve::new(label, pts)?,
        channels,
    })
}

/// Type-covering triangle scheme rate on a grid.
pub fn tc_curve(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    grid: &[f64],
    tol: f64,
) -> Result<SchemeCurve> {
    check_grid(grid)?;
    let pts = grid
        .iter()
        .map(|&d| {
            Ok(solver_point(
                d,
                r_id_tc(px, py, rho, d, tol)?,
                rho.cols(),
                tol,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    scheme_curve("tc", pts)
}

/// Lossy-compression triangle scheme rate on a grid.
pub fn lc_curve(
    px: &Pmf,
    py: &Pmf,
    rho: &DistortionMatrix,
    grid: &[f64],
    tol: f64,
) -> Result<SchemeCurve> {
    check_grid(grid)?;
    let pts = grid
        .iter()
        .map(|&d| {
            let r = r_id_lc(px, py, rho, d, tol)?;
            let status = match r.rate {
                None => PointStatus::Infeasible,
                Some(v) if v == 0.0 => PointStatus::ConstraintInactive,
                Some(_) => PointStatus::Optimal,
            };
            let pt = CurvePoint {
                d,
                rate: r.rate,
                status,
                pattern_index: None,
                u_size: rho.cols(),
                tol,
            };
            Ok((pt, r.at.map(|t| t.channel)))
        })
        .collect::<Result<Vec<_>>>()?;
    scheme_curve("lc", pts)
}

/// Classical rate-distortion function on a grid.
pub fn rd_curve(px: &Pmf, rho: &DistortionMatrix, grid: &[f64], tol: f64) -> Result<SchemeCurve> {
    check_grid(grid)?;
    let pts = grid
        .iter()
        .map(|&d| {
            Ok(solver_point(
                d,
                rate_distortion(px, rho, d, tol)?,
                rho.cols(),
                tol,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    scheme_curve("rd", pts)
}

/// Hamming lower bound on a grid.
pub fn bound_curve(px: &Pmf, py: &Pmf, grid: &[f64]) -> Result<RateCurve> {
    check_grid(grid)?;
    let pts = grid
        .iter()
        .map(|&d| Ok(CurvePoint::bound(d, hamming_lower_bound(px, py, d)?.value)))
        .collect::<Result<Vec<_>>>()?;
    RateCurve::new("bound", pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert_eq!(check_grid(&[0.2, 0.1]), Err(Error::NonIncreasingGrid(1)));
        assert_eq!(check_grid(&[]), Err(Error::TooFewPoints(0)));
        assert!(check_grid(&[0.1]).is_ok());
    }

    #[test]
    fn fixed_cardinality_skips_envelope() {
        let p = Pmf::new(vec![0.8, 0.1, 0.1]).unwrap();
        let h = DistortionMatrix::hamming(3).unwrap();
        let opts = CurveOptions {
            fixed_u_size: Some(4),
            ..Default::default()
        };
        let c = r_id_curve_with(&p, &p, &h, &[0.1, 0.2], 1e-4, opts).unwrap();
        assert!(c.curve.points().iter().all(|pt| pt.u_size == 4));
        assert!(c
            .channels
            .iter()
            .all(|ch| ch.as_ref().is_some_and(|w| w.output_size() == 4)));
    }

    #[test]
    fn rd_curve_binary() {
        let half = Pmf::uniform(2).unwrap();
        let h = DistortionMatrix::hamming(2).unwrap();
        let c = rd_curve(&half, &h, &[0.1, 0.5], 1e-5).unwrap();
        let r = c.curve.rates();
        assert!((r[0].unwrap() - 0.531004406410718778746410669617).abs() < 1e-4);
        assert_eq!(r[1], Some(0.0));
    }
}
