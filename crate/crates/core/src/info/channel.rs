use serde::Serialize;

use super::Pmf;
use crate::{Error, Result};

/// A conditional distribution `W(u | x)`, one pmf per input letter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    input_size: usize,
    output_size: usize,
    cond: Vec<f64>,
}

impl Channel {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("no rows".into()));
        }
        let output_size = rows[0].len();
        let mut cond = Vec::with_capacity(input_size * output_size);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidChannel(format!("row {x} has wrong length")));
            }
            let pmf = Pmf::new(row).map_err(|e| Error::InvalidChannel(format!("row {x}: {e}")))?;
            cond.extend_from_slice(pmf.probs());
        }
        Ok(Self {
            input_size,
            output_size,
            cond,
        })
    }

    /// Builds from a flat row-major table, renormalizing every row. Rows that
    /// are entirely zero become uniform.
    pub(crate) fn from_flat_normalizing(
        input_size: usize,
        output_size: usize,
        mut cond: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(cond.len(), input_size * output_size);
        for row in cond.chunks_mut(output_size) {
            for v in row.iter_mut() {
                if !(*v > 0.0) {
                    *v = 0.0;
                }
            }
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / output_size as f64);
            }
        }
        Self {
            input_size,
            output_size,
            cond,
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut cond = vec![0.0; size * size];
        for x in 0..size {
            cond[x * size + x] = 1.0;
        }
        Self {
            input_size: size,
            output_size: size,
            cond,
        }
    }

    /// Every input mapped to output `u`.
    pub fn constant(input_size: usize, output_size: usize, u: usize) -> Self {
        let mut cond = vec![0.0; input_size * output_size];
        for x in 0..input_size {
            cond[x * output_size + u] = 1.0;
        }
        Self {
            input_size,
            output_size,
            cond,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.cond[x * self.output_size + u]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.cond[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn flat(&self) -> &[f64] {
        &self.cond
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.input_size).map(|x| self.row(x).to_vec()).collect()
    }

    /// `P_U(u) = sum_x px(x) W(u|x)`.
    pub fn output_marginal(&self, px: &Pmf) -> Result<Pmf> {
        self.check_input(px)?;
        let mut pu = vec![0.0; self.output_size];
        for x in 0..self.input_size {
            let p = px.get(x);
            for (acc, w) in pu.iter_mut().zip(self.row(x)) {
                *acc += p * w;
            }
        }
        Pmf::from_weights(pu)
    }

    /// `sum_{x,u} px(x) W(u|x) table(x,u)` for a row-major `|X| x |U|` table.
    pub fn expectation(&self, px: &Pmf, table: &[f64]) -> Result<f64> {
        self.check_input(px)?;
        if table.len() != self.cond.len() {
            return Err(Error::DimensionMismatch {
                what: "score table entries",
                expected: self.cond.len(),
                got: table.len(),
            });
        }
        Ok(self
            .cond
            .iter()
            .zip(table)
            .enumerate()
            .map(|(i, (w, c))| px.get(i / self.output_size) * w * c)
            .sum())
    }

    /// Convex combination `theta * self + (1 - theta) * other`.
    pub fn mix(&self, other: &Channel, theta: f64) -> Result<Channel> {
        if self.input_size != other.input_size || self.output_size != other.output_size {
            return Err(Error::DimensionMismatch {
                what: "channel shapes in mixture",
                expected: self.cond.len(),
                got: other.cond.len(),
            });
        }
        let theta = theta.clamp(0.0, 1.0);
        let cond = self
            .cond
            .iter()
            .zip(&other.cond)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        Ok(Channel::from_flat_normalizing(
            self.input_size,
            self.output_size,
            cond,
        ))
    }

    pub(crate) fn check_input(&self, px: &Pmf) -> Result<()> {
        if px.len() != self.input_size {
            return Err(Error::DimensionMismatch {
                what: "pmf size vs channel input size",
                expected: self.input_size,
                got: px.len(),
            });
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn rows_are_normalized(&self) -> bool {
        self.cond.chunks(self.output_size).all(|r| {
            (r.iter().sum::<f64>() - 1.0).abs() <= super::NORM_TOL && r.iter().all(|&v| v >= 0.0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_and_expectation() {
        let ch = Channel::from_rows(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let px = Pmf::new(vec![0.8, 0.2]).unwrap();
        let pu = ch.output_marginal(&px).unwrap();
        assert!((pu.get(0) - 0.78).abs() < 1e-15);
        let e = ch.expectation(&px, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((e - (0.72 + 0.14)).abs() < 1e-15);
    }

    #[test]
    fn mixture_stays_normalized() {
        let a = Channel::identity(3);
        let b = Channel::constant(3, 3, 2);
        let m = a.mix(&b, 0.3).unwrap();
        assert!(m.rows_are_normalized());
        assert!((m.get(0, 0) - 0.3).abs() < 1e-15);
        assert!((m.get(0, 2) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Channel::from_rows(vec![vec![0.5, 0.6]]).is_err());
        assert!(Channel::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }
}
