mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simid::info::{
    entropy, entropy_of, kl_divergence, lower_convex_envelope, mutual_information, CurvePoint,
    PointStatus, RateCurve,
};
use simid::rates::{lc_curve, r_id_curve, tc_curve};
use simid::sim::{estimate_maybe_probability, exhaustive_admissibility_check, Codebook};
use simid::solver::{min_mi_linear_constraint, rate_distortion, LinearScore};
use simid::transport::{rho_bar, rho_bar_hamming};
use simid::{DistortionMatrix, Pmf};

use common::*;

fn pmf_strategy(k: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| Pmf::from_weights(w).unwrap())
}

fn sized_pmfs() -> impl Strategy<Value = (Pmf, Pmf)> {
    (2usize..=5).prop_flat_map(|k| (pmf_strategy(k), pmf_strategy(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutual_information_is_entropy_difference(seed in any::<u64>(), k in 2usize..=4, m in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let px = random_pmf(&mut rng, k, 0.01);
        let w = random_channel(&mut rng, k, m);
        let pu = w.output_marginal(&px).unwrap();
        let cond: f64 = (0..k).map(|x| px.get(x) * entropy_of(w.row(x))).sum();
        let i = mutual_information(&px, &w).unwrap();
        prop_assert!((i - (entropy(&pu) - cond)).abs() < 1e-12);
        prop_assert!(i >= -1e-15 && i <= entropy(&px).min((m as f64).log2()) + 1e-12);
    }

    #[test]
    fn kl_is_nonnegative((p, q) in sized_pmfs()) {
        prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-15);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn envelope_is_idempotent_and_below(rates in prop::collection::vec(0.0f64..2.0, 2..12)) {
        let pts: Vec<CurvePoint> = rates
            .iter()
            .enumerate()
            .map(|(i, &r)| CurvePoint {
                d: i as f64 * 0.1,
                rate: Some(r),
                status: PointStatus::Optimal,
                pattern_index: None,
                u_size: 2,
                tol: 1e-4,
            })
            .collect();
        let c = RateCurve::new("x", pts).unwrap();
        let e = lower_convex_envelope(&c).unwrap();
        let ee = lower_convex_envelope(&e).unwrap();
        for ((a, b), orig) in e.rates().iter().zip(ee.rates()).zip(c.rates()) {
            let (a, b, orig) = (a.unwrap(), b.unwrap(), orig.unwrap());
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= orig + 1e-12);
        }
    }

    #[test]
    fn transport_symmetry_and_bounds(seed in any::<u64>(), k in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (random_pmf(&mut rng, k, 0.0), random_pmf(&mut rng, k, 0.0));
        let rho = random_distortion(&mut rng, k, 0.1, 3.0);
        let (v, coupling) = rho_bar(&p, &q, &rho).unwrap();
        let (w, _) = rho_bar(&q, &p, &rho.transpose()).unwrap();
        prop_assert!((v - w).abs() < 1e-9);
        prop_assert!(v >= -1e-12 && v <= rho.rho_max() + 1e-12);
        for (a, b) in coupling.row_sums().iter().zip(p.probs()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in coupling.col_sums().iter().zip(q.probs()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let tv = rho_bar_hamming(&p, &q).unwrap();
        prop_assert!((rho_bar(&p, &q, &hamming(k)).unwrap().0 - tv).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solver_rate_grows_with_threshold(seed in any::<u64>(), cols in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let px = random_pmf(&mut rng, 2, 0.1);
        let table: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..cols).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect())
            .collect();
        let probe = LinearScore::new(table.clone(), 0.0).unwrap();
        let (lo, hi) = (probe.best_constant_score(&px), probe.max_score(&px));
        let mut last = 0.0;
        for i in 0..=6 {
            let t = lo + (hi - lo) * i as f64 / 6.0;
            let s = LinearScore::new(table.clone(), t).unwrap();
            let r = min_mi_linear_constraint(&px, &s, cols, 1e-5).unwrap().optimal_rate;
            prop_assert!(r >= last - 2e-5, "rate {} after {} at step {}", r, last, i);
            last = r;
        }
    }

    #[test]
    fn rate_distortion_is_convex_nonincreasing(seed in any::<u64>(), k in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let px = random_pmf(&mut rng, k, 0.05);
        let rho = hamming(k);
        let r: Vec<f64> = (0..8)
            .map(|i| rate_distortion(&px, &rho, 0.6 * i as f64 / 7.0, 1e-6).unwrap().optimal_rate)
            .collect();
        for w in r.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-6);
        }
        for w in r.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-6);
        }
    }

    #[test]
    fn scheme_rates_are_ordered(seed in any::<u64>(), k in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (px, py) = (random_pmf(&mut rng, k, 0.05), random_pmf(&mut rng, k, 0.05));
        let rho = hamming(k);
        let grid: Vec<f64> = (1..=6).map(|i| 0.08 * i as f64).collect();
        let tol = 1e-4;
        let inf = |r: Option<f64>| r.unwrap_or(f64::INFINITY);
        let id = r_id_curve(&px, &py, &rho, &grid, tol).unwrap().curve.rates();
        let tc = tc_curve(&px, &py, &rho, &grid, tol).unwrap().curve.rates();
        let lc = lc_curve(&px, &py, &rho, &grid, tol).unwrap().curve.rates();
        for i in 0..grid.len() {
            prop_assert!(inf(id[i]) <= inf(tc[i]) + 2.0 * tol, "R_ID > R_TC at {}", grid[i]);
            prop_assert!(inf(tc[i]) <= inf(lc[i]) + 2.0 * tol, "R_TC > R_LC at {}", grid[i]);
            prop_assert!(inf(id[i]) <= (k as f64).log2() + tol || id[i].is_none());
        }
    }

    #[test]
    fn triangle_scheme_never_misses(
        seed in any::<u64>(),
        words in 1usize..6,
        d in 0.0f64..0.6,
        ternary in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, n) = if ternary { (3, 5) } else { (2, 8) };
        let rho = if ternary {
            DistortionMatrix::new(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![1.5, 1.0, 0.0]]).unwrap()
        } else {
            hamming(2)
        };
        let codewords = (0..words)
            .map(|_| (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0..k) as u8).collect())
            .collect();
        let cb = Codebook::from_codewords(n, codewords, &rho).unwrap();
        prop_assert!(exhaustive_admissibility_check(&cb, d, seed).unwrap().passed());
        let p = random_pmf(&mut rng, k, 0.1);
        let s = estimate_maybe_probability(&cb, &p, &p, d, 2048, seed).unwrap();
        prop_assert_eq!(s.false_negative_count, 0);
    }
}
