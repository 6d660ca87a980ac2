use serde::Serialize;

use crate::{Error, Result};

/// How a curve point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    /// An active constrained program solved to tolerance.
    Optimal,
    /// The constant channel is feasible, so the rate is zero.
    ConstraintInactive,
    /// No channel meets the constraint; the rate is infinite.
    Infeasible,
    /// Value lowered by the lower convex envelope.
    Envelope,
    /// Closed form or bound, no optimization involved.
    Bound,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Optimal => "optimal",
            PointStatus::ConstraintInactive => "constraint_inactive",
            PointStatus::Infeasible => "infeasible",
            PointStatus::Envelope => "envelope",
            PointStatus::Bound => "bound",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "optimal" => PointStatus::Optimal,
            "constraint_inactive" => PointStatus::ConstraintInactive,
            "infeasible" => PointStatus::Infeasible,
            "envelope" => PointStatus::Envelope,
            "bound" => PointStatus::Bound,
            _ => return None,
        })
    }
}

/// One `(D, R)` sample. `rate == None` encodes an infinite rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub d: f64,
    pub rate: Option<f64>,
    pub status: PointStatus,
    pub pattern_index: Option<usize>,
    pub u_size: usize,
    pub tol: f64,
}

impl CurvePoint {
    pub fn bound(d: f64, rate: f64) -> Self {
        Self {
            d,
            rate: Some(rate),
            status: PointStatus::Bound,
            pattern_index: None,
            u_size: 0,
            tol: 0.0,
        }
    }
}

/// Rate samples on a strictly increasing distortion grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCurve {
    label: String,
    points: Vec<CurvePoint>,
}

impl RateCurve {
    pub fn new(label: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.d.is_finite() {
                return Err(Error::Domain(format!("non-finite D at index {i}")));
            }
            if i > 0 && p.d <= points[i - 1].d {
                return Err(Error::NonIncreasingGrid(i));
            }
            if let Some(r) = p.rate {
                if !r.is_finite() || r < -p.tol.max(1e-12) {
                    return Err(Error::Domain(format!("rate {r} at index {i}")));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }

    /// A curve of bound points from `(D, R)` pairs.
    pub fn from_pairs(label: impl Into<String>, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            label,
            pairs
                .iter()
                .map(|&(d, r)| CurvePoint::bound(d, r))
                .collect(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.d).collect()
    }

    pub fn rates(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.rate).collect()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Greatest convex minorant of the finite points, resampled on the same grid.
///
/// Points with infinite rate stay infinite. Points strictly lowered are
/// tagged [`PointStatus::Envelope`]; hull vertices keep their exact input
/// values and tags.
pub fn lower_convex_envelope(curve: &RateCurve) -> Result<RateCurve> {
    let pts = curve.points();
    if pts.len() < 2 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let finite: Vec<(f64, f64)> = pts
        .iter()
        .filter_map(|p| p.rate.map(|r| (p.d, r)))
        .collect();

    // Andrew's monotone chain, lower half.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(finite.len());
    for &p in &finite {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let mut out = Vec::with_capacity(pts.len());
    let mut seg = 0;
    for p in pts {
        let Some(r) = p.rate else {
            out.push(p.clone());
            continue;
        };
        while seg + 1 < hull.len() && hull[seg + 1].0 < p.d {
            seg += 1;
        }
        let value = if hull[seg].0 == p.d || seg + 1 == hull.len() {
            r
        } else if hull[seg + 1].0 == p.d {
            r
        } else {
            let (a, b) = (hull[seg], hull[seg + 1]);
            let t = (p.d - a.0) / (b.0 - a.0);
            (a.1 + t * (b.1 - a.1)).min(r)
        };
        let mut q = p.clone();
        if value < r {
            q.rate = Some(value);
            q.status = PointStatus::Envelope;
            q.pattern_index = None;
        }
        out.push(q);
    }
    RateCurve::new(curve.label(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(c: &RateCurve) -> Vec<f64> {
        c.points().iter().map(|p| p.rate.unwrap()).collect()
    }

    #[test]
    fn bump_is_replaced_by_chord() {
        let c = RateCurve::from_pairs("t", &[(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)]).unwrap();
        let e = lower_convex_envelope(&c).unwrap();
        assert_eq!(rates(&e), vec![0.0, 1.0, 2.0]);
        assert_eq!(e.points()[1].status, PointStatus::Envelope);
        assert_eq!(e.points()[0].status, PointStatus::Bound);
    }

    #[test]
    fn convex_curve_is_a_fixed_point() {
        let pairs: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, (i * i) as f64)).collect();
        let c = RateCurve::from_pairs("sq", &pairs).unwrap();
        assert_eq!(lower_convex_envelope(&c).unwrap(), c);
    }

    #[test]
    fn infinite_points_are_kept() {
        let mut pts: Vec<CurvePoint> = [(0.0, 0.0), (1.0, 3.0), (2.0, 4.0)]
            .iter()
            .map(|&(d, r)| CurvePoint::bound(d, r))
            .collect();
        pts.push(CurvePoint {
            d: 3.0,
            rate: None,
            status: PointStatus::Infeasible,
            pattern_index: None,
            u_size: 2,
            tol: 1e-4,
        });
        let c = RateCurve::new("inf", pts).unwrap();
        let e = lower_convex_envelope(&c).unwrap();
        assert_eq!(e.points()[3].rate, None);
        assert_eq!(e.points()[1].rate, Some(2.0));
    }

    #[test]
    fn errors() {
        let one = RateCurve::from_pairs("x", &[(0.0, 0.0)]).unwrap();
        assert_eq!(lower_convex_envelope(&one), Err(Error::TooFewPoints(1)));
        assert_eq!(
            RateCurve::from_pairs("x", &[(0.0, 0.0), (0.0, 1.0)]),
            Err(Error::NonIncreasingGrid(1))
        );
    }
}
