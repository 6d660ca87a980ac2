use serde::Serialize;

use super::NORM_TOL;
use crate::{Error, Result};

/// Accepted deviation of the raw weight sum from one in [`Pmf::new`].
const INPUT_SUM_TOL: f64 = 1e-6;

/// A probability vector over a finite alphabet `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Builds a pmf from weights that already sum to one (within 1e-6); the
    /// weights are renormalized so the stored sum is one to 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let sum = Self::check_weights(&probs)?;
        if (sum - 1.0).abs() > INPUT_SUM_TOL {
            return Err(Error::InvalidPmf(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self::normalized(probs, sum))
    }

    /// Builds a pmf proportional to arbitrary nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum = Self::check_weights(&weights)?;
        if sum <= 0.0 {
            return Err(Error::InvalidPmf("all weights are zero".into()));
        }
        Ok(Self::normalized(weights, sum))
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / size as f64; size],
        })
    }

    /// Point mass on `letter`.
    pub fn point(size: usize, letter: usize) -> Result<Self> {
        if letter >= size {
            return Err(Error::InvalidPmf(format!(
                "letter {letter} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[letter] = 1.0;
        Ok(Self { probs })
    }

    /// Bernoulli(p) on `{0, 1}`: `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    fn check_weights(w: &[f64]) -> Result<f64> {
        if w.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        for (i, &x) in w.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidPmf(format!("weight {i} is {x}")));
            }
        }
        Ok(w.iter().sum())
    }

    fn normalized(mut probs: Vec<f64>, sum: f64) -> Self {
        if (sum - 1.0).abs() > f64::EPSILON {
            for p in probs.iter_mut() {
                *p /= sum;
            }
        }
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= NORM_TOL);
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, letter: usize) -> f64 {
        self.probs[letter]
    }

    /// Largest absolute coordinate difference.
    pub fn sup_distance(&self, other: &Pmf) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Cumulative sums, used for inverse-cdf sampling.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_unnormalized() {
        assert!(Pmf::new(vec![0.5, -0.1, 0.6]).is_err());
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        assert!(Pmf::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let p = Pmf::new(vec![0.8, 0.1, 0.1 + 3e-7]).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() <= NORM_TOL);
        let q = Pmf::from_weights(vec![2.0, 6.0]).unwrap();
        assert_eq!(q.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn constructors() {
        assert_eq!(Pmf::point(3, 1).unwrap().probs(), &[0.0, 1.0, 0.0]);
        assert!(Pmf::point(3, 3).is_err());
        assert_eq!(Pmf::bernoulli(0.1).unwrap().probs(), &[0.9, 0.1]);
        let c = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap().cdf();
        assert!((c[2] - 1.0).abs() < 1e-15);
    }
}
