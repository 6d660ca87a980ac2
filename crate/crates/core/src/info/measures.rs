use super::{Channel, Pmf, PROB_FLOOR};
use crate::{Error, Result};

#[inline]
fn plogp(p: f64) -> f64 {
    if p < PROB_FLOOR {
        0.0
    } else {
        p * p.log2()
    }
}

/// Shannon entropy of raw weights, `-sum p log2 p` with `0 log 0 = 0`.
pub fn entropy_of(probs: &[f64]) -> f64 {
    let h = -probs.iter().map(|&p| plogp(p)).sum::<f64>();
    h.max(0.0)
}

pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

/// `h2(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// The root of `h2(p) = h` in `[0, 1/2]`, for `h` in `[0, 1]`.
pub fn binary_entropy_inverse(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Domain(format!(
            "binary entropy value {h} outside [0, 1]"
        )));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `I(X;U)` for a row-major `|X| x |U|` channel table. No validation.
pub fn mutual_information_raw(px: &[f64], w: &[f64], cols: usize) -> f64 {
    let mut pu = vec![0.0; cols];
    for (x, &p) in px.iter().enumerate() {
        for (acc, &v) in pu.iter_mut().zip(&w[x * cols..(x + 1) * cols]) {
            *acc += p * v;
        }
    }
    let mut mi = 0.0;
    for (x, &p) in px.iter().enumerate() {
        if p < PROB_FLOOR {
            continue;
        }
        for (u, &v) in w[x * cols..(x + 1) * cols].iter().enumerate() {
            if v < PROB_FLOOR || pu[u] < PROB_FLOOR {
                continue;
            }
            mi += p * v * (v / pu[u]).log2();
        }
    }
    mi.max(0.0)
}

/// `I(X;U) = sum_{x,u} px(x) W(u|x) log2(W(u|x) / P_U(u))`.
pub fn mutual_information(px: &Pmf, ch: &Channel) -> Result<f64> {
    ch.check_input(px)?;
    Ok(mutual_information_raw(
        px.probs(),
        ch.flat(),
        ch.output_size(),
    ))
}

/// `D(p || q)` in bits.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "pmf sizes in divergence",
            expected: p.len(),
            got: q.len(),
        });
    }
    let mut d = 0.0;
    for (i, (&a, &b)) in p.probs().iter().zip(q.probs()).enumerate() {
        if a < PROB_FLOOR {
            continue;
        }
        if b < PROB_FLOOR {
            return Err(Error::AbsoluteContinuityViolation { index: i, p: a });
        }
        d += a * (a / b).log2();
    }
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values below were evaluated with 30-digit arithmetic.
    const H_08_01_01: f64 = 0.921928094887362347870319429489;
    const MI_EXAMPLE: f64 = 0.208712848244402092085513432944;
    const KL_EXAMPLE: f64 = 0.278071905112637652129680570511;
    const H2_INV_HALF: f64 = 0.110027864438359551261811704335;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&pmf(&[1.0, 0.0])), 0.0);
        assert_eq!(entropy(&pmf(&[0.5, 0.5])), 1.0);
        assert!((entropy(&pmf(&[0.8, 0.1, 0.1])) - H_08_01_01).abs() < 1e-14);
        assert!((entropy(&Pmf::uniform(7).unwrap()) - 7f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn mutual_information_examples() {
        let px = pmf(&[0.5, 0.5]);
        let same = Channel::from_rows(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert!(mutual_information(&px, &same).unwrap().abs() < 1e-15);
        assert!((mutual_information(&px, &Channel::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        let ch = Channel::from_rows(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let mi = mutual_information(&pmf(&[0.8, 0.2]), &ch).unwrap();
        assert!((mi - MI_EXAMPLE).abs() < 1e-14);
        assert!(mutual_information(&pmf(&[0.2, 0.3, 0.5]), &ch).is_err());
    }

    #[test]
    fn kl_examples() {
        let p = pmf(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        assert_eq!(
            kl_divergence(&pmf(&[1.0, 0.0]), &pmf(&[0.5, 0.5])).unwrap(),
            1.0
        );
        let d = kl_divergence(&pmf(&[0.8, 0.2]), &pmf(&[0.5, 0.5])).unwrap();
        assert!((d - KL_EXAMPLE).abs() < 1e-14);
        assert_eq!(
            kl_divergence(&pmf(&[0.5, 0.5]), &pmf(&[1.0, 0.0])),
            Err(Error::AbsoluteContinuityViolation { index: 1, p: 0.5 })
        );
    }

    #[test]
    fn binary_entropy_inverse_matches_reference() {
        assert!((binary_entropy_inverse(0.5).unwrap() - H2_INV_HALF).abs() < 1e-14);
        assert_eq!(binary_entropy_inverse(0.0).unwrap(), 0.0);
        assert!(binary_entropy_inverse(1.5).is_err());
    }
}
