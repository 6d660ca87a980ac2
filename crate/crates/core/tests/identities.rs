mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simid::info::entropy;
use simid::rates::{
    enumerate_sign_patterns, linear_score_of_pattern, r_id_general_with, r_id_hamming, Assignments,
};
use simid::sim::{
    assign_signature, build_codebook, Codebook, CodebookOptions, Coverage, SignatureIndex,
};
use simid::solver::distortion_rate;
use simid::{Channel, DistortionMatrix, Pmf};

use common::*;

/// `L_f(W)` in its two-term form, through the posterior `P_{X|U}`.
fn l_f_direct(signs: &[Vec<u8>], px: &Pmf, py: &Pmf, w: &Channel) -> f64 {
    let pu = w.output_marginal(px).unwrap();
    let mut total = 0.0;
    for (u, &pu_u) in pu.probs().iter().enumerate() {
        if pu_u == 0.0 {
            continue;
        }
        let inner: f64 = (0..px.len())
            .map(|x| {
                let s = if signs[x][u] == 1 { -1.0 } else { 1.0 };
                let posterior = px.get(x) * w.get(x, u) / pu_u;
                s * (posterior - py.get(x))
            })
            .sum();
        total += pu_u * inner;
    }
    total
}

#[test]
fn linear_score_matches_two_term_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let k = rng.gen_range(2..=4);
        let u = rng.gen_range(1..=k);
        let patterns: Vec<_> = enumerate_sign_patterns(k, u).unwrap().collect();
        if patterns.is_empty() {
            continue;
        }
        let f = &patterns[rng.gen_range(0..patterns.len())];
        let (px, py) = (random_pmf(&mut rng, k, 0.0), random_pmf(&mut rng, k, 0.0));
        let w = random_channel(&mut rng, k, u);
        let score = linear_score_of_pattern(f, &px, &py).unwrap();
        let via_score = score.value(&px, &w).unwrap();
        let direct = l_f_direct(&f.to_rows(), &px, &py, &w);
        assert!(
            (via_score - direct).abs() <= 1e-12,
            "{via_score} vs {direct}"
        );
        checked += 1;
    }
}

fn brute_nearest(cb: &Codebook, rho: &DistortionMatrix, x: &[u8]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, c) in cb.codewords().iter().enumerate() {
        let t: f64 = c
            .iter()
            .zip(x)
            .map(|(&a, &b)| rho.get(a as usize, b as usize))
            .sum();
        if t < best.1 {
            best = (i, t);
        }
    }
    best
}

#[test]
fn signatures_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    // Asymmetric but metric-like, so the orientation of the stored distortion matters.
    let rho = DistortionMatrix::new(vec![
        vec![0.0, 1.0, 2.0],
        vec![1.0, 0.0, 1.0],
        vec![1.5, 1.0, 0.0],
    ])
    .unwrap();
    let n = 10;
    let codewords: Vec<Vec<u8>> = (0..40)
        .map(|_| (0..n).map(|_| rng.gen_range(0..3u8)).collect())
        .collect();
    let cb = Codebook::from_codewords(n, codewords, &rho).unwrap();
    for _ in 0..10_000 {
        let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3u8)).collect();
        let s = assign_signature(&x, &cb).unwrap();
        let (i, t) = brute_nearest(&cb, &rho, &x);
        assert_eq!(s.index, SignatureIndex::Codeword(i));
        assert!((s.stored_total - t).abs() < 1e-12);
    }
}

#[test]
fn typical_codebook_erases_only_atypical_sequences() {
    let px = pmf(&[0.7, 0.3]);
    let rho = hamming(2);
    let target = distortion_rate(&px, &rho, 0.4, 1e-5)
        .unwrap()
        .achieving_channel;
    let gamma = 0.1;
    let opts = CodebookOptions {
        coverage: Coverage::Typical { gamma },
        ..CodebookOptions::default()
    };
    let cb = build_codebook(12, &px, &target, 0.4, &rho, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10_000 {
        let x: Vec<u8> = (0..12).map(|_| rng.gen_bool(0.3) as u8).collect();
        let ones = x.iter().filter(|&&b| b == 1).count() as f64 / 12.0;
        let typical = (ones - 0.3).abs() <= gamma + 1e-12;
        let s = assign_signature(&x, &cb).unwrap();
        match s.index {
            SignatureIndex::Erasure => assert!(!typical),
            SignatureIndex::Codeword(i) => {
                assert!(typical);
                assert_eq!(i, brute_nearest(&cb, &rho, &x).0);
            }
        }
    }
}

#[test]
fn combinations_match_full_enumeration_on_small_alphabets() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let tol = 1e-5;
    let mut compared = 0;
    for k in [2usize, 3] {
        for _ in 0..3 {
            let rho = random_distortion(&mut rng, k, 0.2, 1.5);
            let (px, py) = (random_pmf(&mut rng, k, 0.05), random_pmf(&mut rng, k, 0.05));
            for d in [0.05, 0.15, 0.3] {
                let a = r_id_general_with(&px, &py, &rho, d, k, tol, Assignments::Combinations)
                    .unwrap();
                let b = r_id_general_with(&px, &py, &rho, d, k, tol, Assignments::FullEnumeration)
                    .unwrap();
                match (a.rate, b.rate) {
                    (Some(x), Some(y)) => assert!((x - y).abs() <= 2.0 * tol, "{x} vs {y}"),
                    (x, y) => assert_eq!(x, y),
                }
                compared += 1;
            }
        }
    }
    assert_eq!(compared, 18);
}

#[test]
fn general_method_reproduces_hamming_patterns() {
    let px = pmf(&[0.8, 0.1, 0.1]);
    let h3 = hamming(3);
    for d in [0.05, 0.15, 0.25] {
        let a = r_id_hamming(&px, &px, d, 3, 1e-5).unwrap().rate.unwrap();
        let b = r_id_general_with(&px, &px, &h3, d, 3, 1e-5, Assignments::Combinations)
            .unwrap()
            .rate
            .unwrap();
        assert!((a - b).abs() <= 2e-5, "{a} vs {b} at {d}");
    }
}

#[test]
fn rates_stay_below_source_entropy() {
    let px = pmf(&[0.8, 0.1, 0.1]);
    assert!((entropy(&px) - H_TERNARY).abs() < 1e-15);
    for d in [0.01, 0.1, 0.3] {
        let r = r_id_hamming(&px, &px, d, 3, 1e-4).unwrap().rate.unwrap();
        assert!(r <= H_TERNARY + 1e-4);
    }
}
