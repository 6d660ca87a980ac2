use itertools::Itertools;
use serde::Serialize;

use crate::info::Pmf;
use crate::solver::LinearScore;
use crate::{Error, Result};

/// Largest number of patterns [`enumerate_sign_patterns`] will produce.
pub const PATTERN_BUDGET: u128 = 5_000_000;

/// A binary table `f(x, u)` stored column-wise: bit `x` of `columns[u]` is
/// `f(x, u)`. Columns are non-constant and strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SignPattern {
    x_size: usize,
    columns: Vec<u32>,
}

impl SignPattern {
    pub fn new(x_size: usize, columns: Vec<u32>) -> Result<Self> {
        if !(2..=31).contains(&x_size) {
            return Err(Error::Domain(format!(
                "sign patterns need 2 <= |X| <= 31, got {x_size}"
            )));
        }
        let full = (1u32 << x_size) - 1;
        for (u, &col) in columns.iter().enumerate() {
            if col == 0 || col == full || col > full {
                return Err(Error::Domain(format!(
                    "column {u} is constant or out of range"
                )));
            }
        }
        let mut sorted = columns.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("two columns are identical".into()));
        }
        Ok(Self {
            x_size,
            columns: sorted,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn u_size(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[u32] {
        &self.columns
    }

    pub fn bit(&self, x: usize, u: usize) -> bool {
        self.columns[u] >> x & 1 == 1
    }

    /// `(-1)^f(x, u)`.
    pub fn sign(&self, x: usize, u: usize) -> f64 {
        if self.bit(x, u) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.x_size)
            .map(|x| (0..self.u_size()).map(|u| self.bit(x, u) as u8).collect())
            .collect()
    }
}

/// Number of admissible non-constant column values, `2^x_size - 2`.
pub fn distinct_columns(x_size: usize) -> u128 {
    (1u128 << x_size) - 2
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `C(2^x_size - 2, u_size)`.
pub fn sign_pattern_count(x_size: usize, u_size: usize) -> u128 {
    binomial(distinct_columns(x_size), u_size as u128)
}

/// Lazily yields every pattern with `u_size` distinct non-constant columns,
/// in lexicographic order of the ascending column lists.
pub fn enumerate_sign_patterns(
    x_size: usize,
    u_size: usize,
) -> Result<impl Iterator<Item = SignPattern>> {
    if !(2..=31).contains(&x_size) || u_size == 0 {
        return Err(Error::Domain(format!(
            "need 2 <= |X| <= 31 and |U| >= 1, got {x_size}, {u_size}"
        )));
    }
    let count = sign_pattern_count(x_size, u_size);
    if count > PATTERN_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{count} sign patterns for |X| = {x_size}, |U| = {u_size}"
        )));
    }
    let top = (1u32 << x_size) - 1;
    Ok((1..top)
        .combinations(u_size)
        .map(move |columns| SignPattern { x_size, columns }))
}

/// Per-letter scores `c(x,u) = (-1)^f(x,u) - sum_x' (-1)^f(x',u) py(x')`.
///
/// With `P_U(u) = sum_x px(x) W(u|x)`, the expected score equals
/// `L_f(W) = sum_u P_U(u) sum_x (-1)^f(x,u) (P_{X|U}(x|u) - py(x))`.
/// The returned threshold is zero; callers set `2 D`.
pub fn linear_score_of_pattern(f: &SignPattern, px: &Pmf, py: &Pmf) -> Result<LinearScore> {
    for (what, got) in [
        ("source pmf vs pattern rows", px.len()),
        ("query pmf vs pattern rows", py.len()),
    ] {
        if got != f.x_size {
            return Err(Error::DimensionMismatch {
                what,
                expected: f.x_size,
                got,
            });
        }
    }
    let k = f.u_size();
    let mut c = vec![0.0; f.x_size * k];
    for u in 0..k {
        let shift: f64 = (0..f.x_size).map(|x| f.sign(x, u) * py.get(x)).sum();
        for x in 0..f.x_size {
            c[x * k + u] = f.sign(x, u) - shift;
        }
    }
    LinearScore::from_flat(f.x_size, k, c, 0.0)
}
