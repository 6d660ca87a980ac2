use serde::Serialize;

use crate::info::{binary_entropy, kl_divergence, Pmf};
use crate::{Error, Result};

/// Value of the Hamming lower bound. `kl_infinite` marks a query pmf that
/// misses part of the source support; the bound is then `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub kl_infinite: bool,
}

/// `[2 d^2 log2(e) - D(px || py)]^+` in bits.
pub fn hamming_lower_bound(px: &Pmf, py: &Pmf, d: f64) -> Result<LowerBound> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::Domain(format!(
            "Hamming threshold {d} outside [0, 1]"
        )));
    }
    match kl_divergence(px, py) {
        Ok(kl) => Ok(LowerBound {
            value: (2.0 * d * d * std::f64::consts::LOG2_E - kl).max(0.0),
            kl_infinite: false,
        }),
        Err(Error::AbsoluteContinuityViolation { .. }) => Ok(LowerBound {
            value: 0.0,
            kl_infinite: true,
        }),
        Err(e) => Err(e),
    }
}

/// Binary Hamming rate-distortion function of `Ber(p)`:
/// `h(p) - h(delta)` below `min(p, 1 - p)` and zero above.
pub fn binary_rate_distortion(p: f64, delta: f64) -> f64 {
    if delta >= p.min(1.0 - p) {
        0.0
    } else {
        (binary_entropy(p) - binary_entropy(delta)).clamp(0.0, binary_entropy(p))
    }
}

/// Identification rate for `X ~ Ber(p)`, `Y ~ Ber(1/2)` and Hamming
/// distortion: `R(1/2 - d)`.
pub fn closed_form_binary_symmetric(p: f64, d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "Bernoulli parameter {p} outside [0, 1]"
        )));
    }
    if !(0.0..=0.5).contains(&d) {
        return Err(Error::Domain(format!("threshold {d} outside [0, 1/2]")));
    }
    Ok(binary_rate_distortion(p, 0.5 - d))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values evaluated with 30-digit arithmetic.
    const BOUND_QUARTER: f64 = 0.180336880111120425919990585125;
    const CLOSED_FORM_01: f64 = 0.0290494055453313610019239368793;

    #[test]
    fn lower_bound_examples() {
        let u = Pmf::uniform(2).unwrap();
        let b = hamming_lower_bound(&u, &u, 0.25).unwrap();
        assert!((b.value - BOUND_QUARTER).abs() < 1e-15);
        assert_eq!(hamming_lower_bound(&u, &u, 0.0).unwrap().value, 0.0);
        let p = Pmf::new(vec![0.99, 0.01]).unwrap();
        assert_eq!(hamming_lower_bound(&p, &u, 0.1).unwrap().value, 0.0);
        let point = Pmf::point(2, 0).unwrap();
        let b = hamming_lower_bound(&u, &point, 0.5).unwrap();
        assert!(b.kl_infinite && b.value == 0.0);
    }

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_binary_symmetric(0.5, 0.1).unwrap() - CLOSED_FORM_01).abs() < 1e-15);
        assert_eq!(closed_form_binary_symmetric(0.5, 0.5).unwrap(), 1.0);
        // delta = 0.45 exceeds min(p, 1 - p) = 0.3.
        assert_eq!(closed_form_binary_symmetric(0.3, 0.05).unwrap(), 0.0);
        assert!(closed_form_binary_symmetric(0.5, 0.6).is_err());
    }
}
