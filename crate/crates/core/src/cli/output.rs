//! CSV and JSON emitters.
//!
//! Numbers in CSV carry 10 significant digits in plain decimal notation, and
//! infinite rates are written as `inf`. Reading a file back gives the curve
//! rounded to 10 digits, which writes out to the same bytes.

use serde::Serialize;

use crate::info::{Channel, CurvePoint, PointStatus, RateCurve};
use crate::sim::{AdmissibilityReport, Codebook, SimulationResult};
use crate::{Error, Result};

pub const CURVE_HEADER: &str = "D,R,status,pattern_index,u_size,tol";
pub const SIMULATION_HEADER: &str =
    "D,R_budget,rate,codewords,covering_distortion,p_maybe,halfwidth,trials,seed,false_negatives,admissible";

/// `v` rounded to 10 significant digits, in shortest round-trip form.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.9e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn curve_csv(curve: &RateCurve) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for p in curve.points() {
        let r = p.rate.map_or_else(|| "inf".to_string(), format_sig);
        let idx = p.pattern_index.map_or_else(String::new, |i| i.to_string());
        s.push_str(&format!(
            "{},{r},{},{idx},{},{}\n",
            format_sig(p.d),
            p.status.as_str(),
            p.u_size,
            format_sig(p.tol)
        ));
    }
    s
}

fn field<T: std::str::FromStr>(row: usize, name: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Domain(format!("csv row {row}: bad {name} '{v}'")))
}

/// Reads a file written by [`curve_csv`].
pub fn parse_curve_csv(text: &str, label: &str) -> Result<RateCurve> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER) {
        return Err(Error::Domain(format!("csv header must be {CURVE_HEADER}")));
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let row = i + 2;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(Error::Domain(format!("csv row {row}: expected 6 fields")));
        }
        let rate = match cols[1] {
            "inf" => None,
            v => Some(field(row, "R", v)?),
        };
        let status = PointStatus::parse(cols[2])
            .ok_or_else(|| Error::Domain(format!("csv row {row}: bad status '{}'", cols[2])))?;
        let pattern_index = match cols[3] {
            "" => None,
            v => Some(field(row, "pattern_index", v)?),
        };
        points.push(CurvePoint {
            d: field(row, "D", cols[0])?,
            rate,
            status,
            pattern_index,
            u_size: field(row, "u_size", cols[4])?,
            tol: field(row, "tol", cols[5])?,
        });
    }
    RateCurve::new(label, points)
}

#[derive(Serialize)]
struct JsonPoint<'a> {
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "R")]
    r: Option<f64>,
    status: &'a str,
    pattern_index: Option<usize>,
    u_size: usize,
    tol: f64,
    achieving_channel: Option<Vec<Vec<f64>>>,
}

/// One object per grid point with the CSV fields and the achieving channel.
pub fn curve_json(curve: &RateCurve, channels: Option<&[Option<Channel>]>) -> String {
    let pts: Vec<JsonPoint> = curve
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| JsonPoint {
            d: p.d,
            r: p.rate,
            status: p.status.as_str(),
            pattern_index: p.pattern_index,
            u_size: p.u_size,
            tol: p.tol,
            achieving_channel: channels
                .and_then(|c| c.get(i).cloned().flatten())
                .map(|ch| ch.to_rows()),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&pts).expect("points serialize");
    s.push('\n');
    s
}

/// One simulation row: a codebook at a budget rate, run at one threshold.
pub struct SimulationRow<'a> {
    pub budget_rate: f64,
    pub codebook: &'a Codebook,
    pub result: SimulationResult,
    pub admissibility: Option<AdmissibilityReport>,
}

pub fn simulation_csv(rows: &[SimulationRow]) -> String {
    let mut s = String::from(SIMULATION_HEADER);
    s.push('\n');
    for r in rows {
        let adm = match &r.admissibility {
            None => "",
            Some(a) if a.passed() => "pass",
            Some(_) => "fail",
        };
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{adm}\n",
            format_sig(r.result.d_threshold),
            format_sig(r.budget_rate),
            format_sig(r.codebook.rate()),
            r.codebook.len(),
            format_sig(r.codebook.covering_radius_report().max_distortion),
            format_sig(r.result.p_maybe_estimate),
            format_sig(r.result.confidence_halfwidth),
            r.result.trials,
            r.result.seed,
            r.result.false_negative_count,
        ));
    }
    s
}

#[derive(Serialize)]
struct JsonSimulation<'a> {
    #[serde(rename = "R_budget")]
    budget_rate: f64,
    codewords: usize,
    covering: &'a crate::sim::CoverageReport,
    #[serde(flatten)]
    result: &'a SimulationResult,
    admissibility: Option<&'a AdmissibilityReport>,
}

pub fn simulation_json(rows: &[SimulationRow]) -> String {
    let v: Vec<JsonSimulation> = rows
        .iter()
        .map(|r| JsonSimulation {
            budget_rate: r.budget_rate,
            codewords: r.codebook.len(),
            covering: r.codebook.covering_radius_report(),
            result: &r.result,
            admissibility: r.admissibility.as_ref(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&v).expect("rows serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.180336880111120425919990585125), "0.1803368801");
        assert_eq!(format_sig(1e-4), "0.0001");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(f64::INFINITY), "inf");
        assert_eq!(format_sig(123456789012.0), "123456789000");
    }

    #[test]
    fn csv_round_trip() {
        let pts = vec![
            CurvePoint {
                d: 0.1,
                rate: Some(1.0 / 3.0),
                status: PointStatus::Optimal,
                pattern_index: Some(4),
                u_size: 3,
                tol: 1e-4,
            },
            CurvePoint {
                d: 0.2,
                rate: None,
                status: PointStatus::Infeasible,
                pattern_index: None,
                u_size: 3,
                tol: 1e-4,
            },
        ];
        let c = RateCurve::new("rid", pts).unwrap();
        let text = curve_csv(&c);
        assert!(text.starts_with(
            "D,R,status,pattern_index,u_size,tol\n0.1,0.3333333333,optimal,4,3,0.0001\n"
        ));
        let back = parse_curve_csv(&text, "rid").unwrap();
        assert_eq!(back.points()[0].rate, Some(0.3333333333));
        assert_eq!(back.points()[1].rate, None);
        assert_eq!(curve_csv(&back), text);
        assert!(parse_curve_csv("D,R\n", "x").is_err());
    }
}
