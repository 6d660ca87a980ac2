use serde::Serialize;

use crate::{Error, Result};

const TRIANGLE_SLACK: f64 = 1e-12;

/// Per-letter distortion `rho(x, y) >= 0` on `X x Y`, with cached structure
/// flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    rho_max: f64,
    is_hamming: bool,
    is_symmetric: bool,
    satisfies_triangle: bool,
}

impl DistortionMatrix {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let rows = table.len();
        if rows == 0 {
            return Err(Error::InvalidDistortion("no rows".into()));
        }
        let cols = table[0].len();
        if cols == 0 {
            return Err(Error::InvalidDistortion("no columns".into()));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for (x, row) in table.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidDistortion(format!(
                    "row {x} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (y, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDistortion(format!("entry ({x}, {y}) is {v}")));
                }
                values.push(v);
            }
        }
        Ok(Self::from_flat(rows, cols, values))
    }

    /// Hamming distortion on an alphabet of `size` letters.
    pub fn hamming(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistortion("empty alphabet".into()));
        }
        let table = (0..size)
            .map(|x| (0..size).map(|y| if x == y { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(table)
    }

    fn from_flat(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        let rho_max = values.iter().copied().fold(0.0, f64::max);
        let mut m = Self {
            rows,
            cols,
            values,
            rho_max,
            is_hamming: false,
            is_symmetric: false,
            satisfies_triangle: false,
        };
        if rows == cols {
            m.is_hamming =
                (0..rows).all(|x| (0..cols).all(|y| m.get(x, y) == if x == y { 0.0 } else { 1.0 }));
            m.is_symmetric = (0..rows).all(|x| (0..x).all(|y| m.get(x, y) == m.get(y, x)));
            m.satisfies_triangle = m.first_triangle_violation().is_none();
        }
        m
    }

    /// Exhaustive scan for a triple with `rho(x,z) > rho(x,y) + rho(y,z)`.
    pub fn first_triangle_violation(&self) -> Option<(usize, usize, usize)> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if self.get(x, z) > self.get(x, y) + self.get(y, z) + TRIANGLE_SLACK {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// Errors unless the matrix is square and satisfies the triangle
    /// inequality.
    pub fn require_triangle(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                what: "triangle schemes need a square distortion matrix",
                expected: self.rows,
                got: self.cols,
            });
        }
        match self.first_triangle_violation() {
            Some((x, y, z)) => Err(Error::TriangleViolation(x, y, z)),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.cols + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.cols..(x + 1) * self.cols]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn is_hamming(&self) -> bool {
        self.is_hamming
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_symmetric
    }

    /// Only meaningful for square matrices; false otherwise.
    pub fn satisfies_triangle(&self) -> bool {
        self.satisfies_triangle
    }

    pub fn has_zero_diagonal(&self) -> bool {
        self.is_square() && (0..self.rows).all(|x| self.get(x, x) == 0.0)
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for y in 0..self.cols {
            for x in 0..self.rows {
                values.push(self.get(x, y));
            }
        }
        Self::from_flat(self.cols, self.rows, values)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|x| self.row(x).to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_flags() {
        let h = DistortionMatrix::hamming(3).unwrap();
        assert!(h.is_hamming() && h.is_symmetric() && h.satisfies_triangle());
        assert_eq!(h.rho_max(), 1.0);
        assert!(h.has_zero_diagonal());
    }

    #[test]
    fn squared_difference_breaks_triangle() {
        let m = DistortionMatrix::new(vec![
            vec![0.0, 1.0, 4.0],
            vec![1.0, 0.0, 1.0],
            vec![4.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(m.is_symmetric());
        assert!(!m.is_hamming());
        assert!(!m.satisfies_triangle());
        assert_eq!(m.require_triangle(), Err(Error::TriangleViolation(0, 1, 2)));
        assert_eq!(m.rho_max(), 4.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(DistortionMatrix::new(vec![vec![0.0, -1.0]]).is_err());
        assert!(DistortionMatrix::new(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(DistortionMatrix::new(vec![]).is_err());
    }

    #[test]
    fn transpose_of_rectangular() {
        let m = DistortionMatrix::new(vec![vec![0.0, 1.0, 2.0], vec![3.0, 4.0, 5.0]]).unwrap();
        let t = m.transpose();
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.get(2, 1), 5.0);
        assert!(!t.satisfies_triangle());
    }
}
