//! Covering codebooks built by greedy set cover.
//!
//! A candidate `c` covers a sequence `x` when the joint type of `(x, c)` is
//! within L1 distance `tau` of `T_x x V`, where `T_x` is the type of `x` and
//! `V` the target channel: the conditional type of `c` given `x` is close to
//! `V` on every type class.
//! The tolerance lives on the lattice `tau_l = 2 l / 127`. By default the
//! smallest level at which greedy cover fits in the rate budget is used.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sequence::{pack, pack_into, type_counts, SequenceCost, SequenceSpace};
use crate::info::{Channel, DistortionMatrix, Pmf};
use crate::{Error, Result};

/// Largest sequence space a codebook enumerates.
pub const SPACE_BUDGET: u128 = 1 << 20;
/// Largest number of (sequence, candidate) pairs in the cover table.
pub const PAIR_BUDGET: u128 = 1 << 28;
pub const DEFAULT_POOL: usize = 4096;
const TOP_LEVEL: u8 = 127;
const ERASED: u32 = u32::MAX;

fn level_tau(l: u8) -> f64 {
    2.0 * l as f64 / TOP_LEVEL as f64
}

/// Smallest level whose tolerance admits `dist`.
fn level_of(dist: f64) -> u8 {
    let y = (dist - 1e-12) * TOP_LEVEL as f64 / 2.0;
    if y <= 0.0 {
        return 0;
    }
    // Truncating cast instead of `ceil`, which is a libm call on baseline x86-64.
    let t = y as u32;
    (t + (y > t as f64) as u32).min(TOP_LEVEL as u32) as u8
}

/// Which sequences the codebook must cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Coverage {
    /// Every sequence of length `n`.
    Full,
    /// Sequences whose letter frequencies are within `gamma` of `P_X` in
    /// every coordinate. Other sequences are erased.
    Typical { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookOptions {
    pub coverage: Coverage,
    /// Fixed joint-type tolerance, rounded down to the level lattice.
    pub tau: Option<f64>,
    /// Largest candidate pool. Smaller spaces are used whole; larger ones
    /// are sampled from the reconstruction marginal.
    pub pool_limit: usize,
    pub seed: u64,
}

impl Default for CodebookOptions {
    fn default() -> Self {
        Self {
            coverage: Coverage::Full,
            tau: None,
            pool_limit: DEFAULT_POOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeCoverage {
    /// Letter counts of the type class.
    pub counts: Vec<usize>,
    pub sequences: usize,
    /// Largest per-letter distortion to the nearest codeword in the class.
    pub max_distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    /// Joint-type tolerance the cover was built at; `None` for codebooks
    /// given explicitly.
    pub tau: Option<f64>,
    /// Sequences that had to be covered.
    pub targets: usize,
    /// Targets within `tau` of some codeword.
    pub covered: usize,
    pub max_distortion: f64,
    pub per_type: Vec<TypeCoverage>,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    space: SequenceSpace,
    codewords: Vec<Vec<u8>>,
    packed: Vec<u32>,
    rate: f64,
    coverage: Coverage,
    report: CoverageReport,
    cost: SequenceCost,
    rho_max: f64,
    /// Nearest codeword and total distortion for every sequence.
    nearest: Vec<(u32, f64)>,
}

impl Codebook {
    /// Full-coverage codebook from explicit codewords.
    pub fn from_codewords(
        n: usize,
        codewords: Vec<Vec<u8>>,
        rho: &DistortionMatrix,
    ) -> Result<Self> {
        let space = checked_space(rho, n)?;
        if codewords.is_empty() {
            return Err(Error::Domain("codebook needs at least one codeword".into()));
        }
        for c in &codewords {
            space.check(c)?;
        }
        let rate = (codewords.len() as f64).log2() / n as f64;
        Self::finish(space, codewords, rate, Coverage::Full, None, None, rho)
    }

    fn finish(
        space: SequenceSpace,
        codewords: Vec<Vec<u8>>,
        rate: f64,
        coverage: Coverage,
        typical: Option<&[bool]>,
        tau_covered: Option<(f64, usize)>,
        rho: &DistortionMatrix,
    ) -> Result<Self> {
        let k = space.alphabet();
        let cost = SequenceCost::new(rho)?;
        let mut packed = Vec::with_capacity(codewords.len() * k);
        for c in &codewords {
            pack_into(c, k, &mut packed);
        }
        let size = space.size() as usize;
        let mut nearest = Vec::with_capacity(size);
        let mut classes: BTreeMap<Vec<usize>, (usize, f64)> = BTreeMap::new();
        let mut max_total: f64 = 0.0;
        let mut targets = 0;
        for idx in 0..size {
            if typical.is_some_and(|t| !t[idx]) {
                nearest.push((ERASED, 0.0));
                continue;
            }
            let x = pack(&space.sequence(idx as u64), k);
            let (mut best, mut best_t) = (0u32, f64::INFINITY);
            for (ci, c) in packed.chunks(k).enumerate() {
                let t = cost.total(c, &x);
                if t < best_t {
                    best = ci as u32;
                    best_t = t;
                }
            }
            nearest.push((best, best_t));
            targets += 1;
            max_total = max_total.max(best_t);
            let e = classes.entry(type_counts(&x)).or_insert((0, 0.0));
            e.0 += 1;
            e.1 = e.1.max(best_t);
        }
        let n = space.n() as f64;
        let per_type = classes
            .into_iter()
            .map(|(counts, (sequences, t))| TypeCoverage {
                counts,
                sequences,
                max_distortion: t / n,
            })
            .collect();
        let (tau, covered) = match tau_covered {
            Some((t, c)) => (Some(t), c),
            None => (None, targets),
        };
        Ok(Self {
            space,
            codewords,
            packed,
            rate,
            coverage,
            report: CoverageReport {
                tau,
                targets,
                covered,
                max_distortion: max_total / n,
                per_type,
            },
            cost,
            rho_max: rho.rho_max(),
            nearest,
        })
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn space(&self) -> SequenceSpace {
        self.space
    }

    pub fn codewords(&self) -> &[Vec<u8>] {
        &self.codewords
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Bits per symbol: `log2(count) / n`, or `log2(count + 1) / n` when an
    /// erasure symbol is part of the alphabet of signatures.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn covering_radius_report(&self) -> &CoverageReport {
        &self.report
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub(crate) fn cost(&self) -> &SequenceCost {
        &self.cost
    }

    pub(crate) fn packed_codeword(&self, i: usize) -> &[u32] {
        let k = self.space.alphabet();
        &self.packed[i * k..(i + 1) * k]
    }

    /// Nearest codeword (`None` when erased) and its total distortion.
    pub(crate) fn lookup(&self, index: u64) -> (Option<usize>, f64) {
        let (c, t) = self.nearest[index as usize];
        ((c != ERASED).then_some(c as usize), t)
    }
}

fn checked_space(rho: &DistortionMatrix, n: usize) -> Result<SequenceSpace> {
    if !rho.is_square() {
        return Err(Error::InvalidDistortion(
            "codebooks need a square distortion matrix".into(),
        ));
    }
    rho.require_triangle()?;
    let space = SequenceSpace::new(rho.rows(), n)?;
    if space.size() > SPACE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{} sequences of length {n} exceed the enumeration budget {SPACE_BUDGET}",
            space.size()
        )));
    }
    Ok(space)
}

/// Greedy set cover with lazily refreshed gains; ties go to the lowest
/// candidate index. Returns the chosen candidates and the number covered.
fn greedy(covers: &[Vec<u64>], targets: usize, limit: usize) -> (Vec<usize>, usize) {
    let words = targets.div_ceil(64);
    let mut uncovered = vec![!0u64; words];
    if targets % 64 != 0 {
        uncovered[words - 1] = (1u64 << (targets % 64)) - 1;
    }
    let gain = |c: &[u64], u: &[u64]| -> usize {
        c.iter()
            .zip(u)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    };
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = covers
        .iter()
        .enumerate()
        .map(|(i, c)| (gain(c, &uncovered), Reverse(i)))
        .collect();
    let (mut chosen, mut covered) = (Vec::new(), 0);
    while covered < targets && chosen.len() < limit {
        let Some((_, Reverse(i))) = heap.pop() else {
            break;
        };
        let g = gain(&covers[i], &uncovered);
        if g == 0 {
            continue;
        }
        if heap.peek().is_some_and(|&top| (g, Reverse(i)) < top) {
            heap.push((g, Reverse(i)));
            continue;
        }
        for (u, c) in uncovered.iter_mut().zip(&covers[i]) {
            *u &= !c;
        }
        covered += g;
        chosen.push(i);
    }
    (chosen, covered)
}

/// Bitset of targets with level `<= level`, per candidate row.
///
/// Levels are at most 127, so adding `127 - level` to every byte sets its
/// high bit exactly when the level exceeds the threshold, eight bytes per
/// `u64` without carries; a multiply gathers the eight flags into one byte.
fn covers_at(levels: &[u8], targets: usize, level: u8) -> Vec<Vec<u64>> {
    const LOW: u64 = 0x0101_0101_0101_0101;
    const HIGH: u64 = 0x8080_8080_8080_8080;
    const GATHER: u64 = 0x0102_0408_1020_4080;
    let add = (TOP_LEVEL - level) as u64 * LOW;
    levels
        .chunks(targets)
        .map(|row| {
            let mut bits = vec![0u64; targets.div_ceil(64)];
            let groups = row.chunks_exact(8);
            let tail = groups.remainder();
            for (g, chunk) in groups.enumerate() {
                let v = u64::from_le_bytes(chunk.try_into().unwrap());
                let le = !(v + add) & HIGH;
                let byte = (le >> 7).wrapping_mul(GATHER) >> 56;
                bits[g / 8] |= byte << (8 * (g % 8));
            }
            let start = row.len() - tail.len();
            for (j, &l) in tail.iter().enumerate() {
                if l <= level {
                    bits[(start + j) / 64] |= 1 << ((start + j) % 64);
                }
            }
            bits
        })
        .collect()
}

/// `|joint type of (x, c) - T_x x V|_1`.
///
/// Only the leading `(k-1)^2` joint counts are popcounts; the last row and
/// column follow from the letter counts. The distance splits into one term
/// per row, each a function of that row's counts, which is tabulated when
/// the table is small.
struct JointDistance {
    k: usize,
    n: usize,
    v: Vec<f64>,
    radix: usize,
    rows: Option<Vec<Vec<f64>>>,
}

const ROW_TABLE_BUDGET: usize = 1 << 22;

impl JointDistance {
    fn new(v: &Channel, n: usize) -> Self {
        let k = v.input_size();
        let radix = n + 1;
        let size = (radix as u128).pow(k as u32);
        let mut jd = Self {
            k,
            n,
            v: v.flat().to_vec(),
            radix,
            rows: None,
        };
        if size * k as u128 <= ROW_TABLE_BUDGET as u128 {
            let size = size as usize;
            let rows = (0..k)
                .map(|a| {
                    let mut counts = vec![0u32; k];
                    (0..size)
                        .map(|code| {
                            let mut c = code;
                            for v in counts.iter_mut() {
                                *v = (c % radix) as u32;
                                c /= radix;
                            }
                            jd.row_term(a, &counts)
                        })
                        .collect()
                })
                .collect();
            jd.rows = Some(rows);
        }
        jd
    }

    fn row_term(&self, a: usize, counts: &[u32]) -> f64 {
        self.row_term_counts(a, counts, counts.iter().sum())
    }

    fn row_term_counts(&self, a: usize, counts: &[u32], total: u32) -> f64 {
        counts
            .iter()
            .enumerate()
            .map(|(b, &c)| (c as f64 - total as f64 * self.v[a * self.k + b]).abs())
            .sum()
    }

    /// `joint` and `col_rest` are scratch buffers of length `k^2` and `k`.
    fn distance(
        &self,
        x: &[u32],
        x_counts: &[u32],
        c: &[u32],
        c_counts: &[u32],
        joint: &mut [u32],
        col_rest: &mut [u32],
    ) -> f64 {
        let k = self.k;
        col_rest.copy_from_slice(c_counts);
        for a in 0..k - 1 {
            let mut row_rest = x_counts[a];
            for b in 0..k - 1 {
                let nab = (x[a] & c[b]).count_ones();
                joint[a * k + b] = nab;
                row_rest -= nab;
                col_rest[b] -= nab;
            }
            joint[a * k + k - 1] = row_rest;
        }
        let mut last_rest = x_counts[k - 1];
        for b in 0..k - 1 {
            joint[(k - 1) * k + b] = col_rest[b];
            last_rest -= col_rest[b];
        }
        joint[k * k - 1] = last_rest;
        let sum: f64 = match &self.rows {
            Some(rows) => (0..k)
                .map(|a| {
                    let code = joint[a * k..(a + 1) * k]
                        .iter()
                        .rev()
                        .fold(0usize, |acc, &c| acc * self.radix + c as usize);
                    rows[a][code]
                })
                .sum(),
            None => (0..k)
                .map(|a| self.row_term(a, &joint[a * k..(a + 1) * k]))
                .sum(),
        };
        sum / self.n as f64
    }
}

fn draw_pool(space: SequenceSpace, q: &Pmf, limit: usize, seed: u64) -> Vec<u64> {
    if space.size() <= limit as u128 {
        return (0..space.size() as u64).collect();
    }
    let cdf = q.cdf();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut pool = Vec::with_capacity(limit);
    for _ in 0..limit.saturating_mul(64) {
        if pool.len() == limit {
            break;
        }
        let seq: Vec<u8> = (0..space.n())
            .map(|_| {
                let u: f64 = rng.gen();
                cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1) as u8
            })
            .collect();
        let idx = space.index(&seq);
        if seen.insert(idx) {
            pool.push(idx);
        }
    }
    pool
}

/// Cover level of every (candidate, target) pair, candidate-major.
fn cover_levels(space: SequenceSpace, xs: &[u32], pool: &[u64], target: &Channel) -> Vec<u8> {
    let (k, n) = (space.alphabet(), space.n());
    let x_counts: Vec<u32> = xs.iter().map(|m| m.count_ones()).collect();
    let jd = JointDistance::new(target, n);
    let mut levels = Vec::with_capacity(pool.len() * xs.len() / k);
    let (mut joint, mut col_rest) = (vec![0u32; k * k], vec![0u32; k]);
    // Binary alphabets: the level depends only on (|x_0|, |c_0|, N_00).
    let binary_levels: Option<Vec<u8>> = (k == 2).then(|| {
        let r = n + 1;
        let mut table = vec![0u8; r * r * r];
        for x0 in 0..=n as u32 {
            for c0 in 0..=n as u32 {
                for n00 in 0..=x0.min(c0) {
                    if x0 + c0 - n00 > n as u32 {
                        continue;
                    }
                    let j = [n00, x0 - n00, c0 - n00, n as u32 + n00 - x0 - c0];
                    let xc = [x0, n as u32 - x0];
                    let d: f64 = (0..2)
                        .map(|a| jd.row_term_counts(a, &j[2 * a..2 * a + 2], xc[a]))
                        .sum::<f64>()
                        / n as f64;
                    table[(x0 as usize * r + c0 as usize) * r + n00 as usize] = level_of(d);
                }
            }
        }
        table
    });
    for &ci in pool {
        let c = pack(&space.sequence(ci), k);
        let cc: Vec<u32> = c.iter().map(|m| m.count_ones()).collect();
        match &binary_levels {
            Some(table) => {
                let r = n + 1;
                let base = cc[0] as usize * r;
                for (x, xc) in xs.chunks_exact(2).zip(x_counts.chunks_exact(2)) {
                    let n00 = (x[0] & c[0]).count_ones() as usize;
                    levels.push(table[(xc[0] as usize * r * r) + base + n00]);
                }
            }
            None => {
                for (x, xc) in xs.chunks_exact(k).zip(x_counts.chunks_exact(k)) {
                    levels.push(level_of(jd.distance(
                        x,
                        xc,
                        &c,
                        &cc,
                        &mut joint,
                        &mut col_rest,
                    )));
                }
            }
        }
    }
    levels
}

/// Greedy covering codebook of blocklength `n` with at most
/// `floor(2^(n budget_rate))` signatures.
pub fn build_codebook(
    n: usize,
    px: &Pmf,
    target: &Channel,
    budget_rate: f64,
    rho: &DistortionMatrix,
    opts: &CodebookOptions,
) -> Result<Codebook> {
    let space = checked_space(rho, n)?;
    let k = space.alphabet();
    for (what, got) in [
        ("source pmf vs alphabet", px.len()),
        ("channel input vs alphabet", target.input_size()),
        ("channel output vs alphabet", target.output_size()),
    ] {
        if got != k {
            return Err(Error::DimensionMismatch {
                what,
                expected: k,
                got,
            });
        }
    }
    if !(budget_rate >= 0.0) || !budget_rate.is_finite() {
        return Err(Error::Domain(format!(
            "budget rate {budget_rate} must be finite and >= 0"
        )));
    }
    if opts.pool_limit == 0 {
        return Err(Error::Domain("candidate pool must be non-empty".into()));
    }
    let signatures = ((n as f64 * budget_rate).exp2() * (1.0 + 1e-12))
        .floor()
        .min(u32::MAX as f64) as usize;
    let (limit, typical) = match opts.coverage {
        Coverage::Full => (signatures.max(1), None),
        Coverage::Typical { gamma } => {
            if !(gamma >= 0.0) {
                return Err(Error::Domain(format!(
                    "typicality slack {gamma} must be >= 0"
                )));
            }
            let t: Vec<bool> = (0..space.size() as u64)
                .map(|i| {
                    let counts = type_counts(&pack(&space.sequence(i), k));
                    counts
                        .iter()
                        .enumerate()
                        .all(|(a, &c)| (c as f64 / n as f64 - px.get(a)).abs() <= gamma + 1e-12)
                })
                .collect();
            (signatures.saturating_sub(1).max(1), Some(t))
        }
    };

    let target_idx: Vec<u64> = match &typical {
        None => (0..space.size() as u64).collect(),
        Some(t) => (0..space.size() as u64)
            .filter(|&i| t[i as usize])
            .collect(),
    };
    let pool_cap = if target_idx.is_empty() {
        opts.pool_limit
    } else {
        (PAIR_BUDGET / target_idx.len() as u128).max(1) as usize
    };
    let pool = draw_pool(
        space,
        &target.output_marginal(px)?,
        opts.pool_limit.min(pool_cap),
        opts.seed,
    );

    let (codewords, tau_covered) = if target_idx.is_empty() {
        (vec![space.sequence(pool[0])], (level_tau(0), 0))
    } else {
        let mut xs = Vec::with_capacity(target_idx.len() * k);
        for &i in &target_idx {
            pack_into(&space.sequence(i), k, &mut xs);
        }
        let levels = cover_levels(space, &xs, &pool, target);
        let m = target_idx.len();
        let run = |l: u8| greedy(&covers_at(&levels, m, l), m, limit);
        let (level, (chosen, covered)) = match opts.tau {
            Some(tau) => {
                let l = (tau * TOP_LEVEL as f64 / 2.0 + 1e-9)
                    .floor()
                    .clamp(0.0, TOP_LEVEL as f64) as u8;
                let res = run(l);
                if res.1 < m {
                    return Err(Error::BudgetExceeded(format!(
                        "cover at tau {:.6} reaches {} of {m} sequences with {} codewords (limit {limit})",
                        level_tau(l),
                        res.1,
                        res.0.len()
                    )));
                }
                (l, res)
            }
            None => {
                // No level below the largest per-sequence minimum can cover
                // everything; the answer usually lies just above it, so the
                // search gallops up from there before bisecting. The top level
                // admits every pair, so one codeword always suffices there.
                let mut floor = vec![TOP_LEVEL; m];
                for row in levels.chunks(m) {
                    for (f, &l) in floor.iter_mut().zip(row) {
                        *f = (*f).min(l);
                    }
                }
                let mut lo = floor.iter().copied().max().unwrap_or(0);
                let mut best = None;
                let mut step = 1u32;
                let mut hi = loop {
                    let probe = (lo as u32 + step - 1).min(TOP_LEVEL as u32) as u8;
                    let res = run(probe);
                    if res.1 == m {
                        best = Some(res);
                        break probe;
                    }
                    if probe == TOP_LEVEL {
                        break TOP_LEVEL;
                    }
                    lo = probe + 1;
                    step *= 2;
                };
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    let res = run(mid);
                    if res.1 == m {
                        hi = mid;
                        best = Some(res);
                    } else {
                        lo = mid + 1;
                    }
                }
                (hi, best.unwrap_or_else(|| run(TOP_LEVEL)))
            }
        };
        let words = chosen.iter().map(|&c| space.sequence(pool[c])).collect();
        (words, (level_tau(level), covered))
    };

    let count = codewords.len();
    let rate = match opts.coverage {
        Coverage::Full => (count as f64).log2() / n as f64,
        Coverage::Typical { .. } => ((count + 1) as f64).log2() / n as f64,
    };
    Codebook::finish(
        space,
        codewords,
        rate,
        opts.coverage,
        typical.as_deref(),
        Some(tau_covered),
        rho,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy_inverse;
    use crate::solver::distortion_rate;

    fn hamming2() -> DistortionMatrix {
        DistortionMatrix::hamming(2).unwrap()
    }

    #[test]
    fn single_letter_identity_uses_both_symbols() {
        let half = Pmf::uniform(2).unwrap();
        let cb = build_codebook(
            1,
            &half,
            &Channel::identity(2),
            1.0,
            &hamming2(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(cb.len(), 2);
        assert_eq!(cb.rate(), 1.0);
        assert_eq!(cb.covering_radius_report().max_distortion, 0.0);
    }

    #[test]
    fn zero_budget_gives_one_codeword() {
        let half = Pmf::uniform(2).unwrap();
        let cb = build_codebook(
            6,
            &half,
            &Channel::identity(2),
            0.0,
            &hamming2(),
            &Default::default(),
        )
        .unwrap();
        assert_eq!(cb.len(), 1);
        assert_eq!(cb.rate(), 0.0);
        let rep = cb.covering_radius_report();
        assert_eq!(rep.covered, 64);
        assert!(rep.max_distortion > 0.0);
    }

    #[test]
    fn n8_half_rate_covers_everything() {
        let half = Pmf::uniform(2).unwrap();
        let dr = distortion_rate(&half, &hamming2(), 0.5, 1e-6).unwrap();
        let cb = build_codebook(
            8,
            &half,
            &dr.achieving_channel,
            0.6,
            &hamming2(),
            &Default::default(),
        )
        .unwrap();
        assert!(cb.len() as f64 <= 2f64.powf(4.8));
        // Brute-force nearest distance for all 256 sequences.
        let mut worst = 0usize;
        for x in 0..256u32 {
            let d = cb
                .codewords()
                .iter()
                .map(|c| (0..8).filter(|&i| (x >> i & 1) as u8 != c[i]).count())
                .min()
                .unwrap();
            worst = worst.max(d);
        }
        let rep = cb.covering_radius_report();
        assert_eq!(rep.covered, 256);
        assert_eq!(rep.max_distortion, worst as f64 / 8.0);
        // Radius-one covers of length 8 need 32 words, so 27 words leave
        // radius two at best.
        assert!(
            rep.max_distortion <= binary_entropy_inverse(0.5).unwrap() + 0.15,
            "{rep:?} {}",
            cb.len()
        );
    }

    #[test]
    fn fixed_tau_too_small_reports_coverage() {
        let half = Pmf::uniform(2).unwrap();
        let opts = CodebookOptions {
            tau: Some(0.0),
            ..Default::default()
        };
        let err =
            build_codebook(6, &half, &Channel::identity(2), 0.5, &hamming2(), &opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded(ref s) if s.contains("of 64 sequences")));
    }

    #[test]
    fn typical_mode_erases_atypical_sequences() {
        let p = Pmf::new(vec![0.75, 0.25]).unwrap();
        let opts = CodebookOptions {
            coverage: Coverage::Typical { gamma: 0.125 },
            ..Default::default()
        };
        let cb = build_codebook(8, &p, &Channel::identity(2), 0.5, &hamming2(), &opts).unwrap();
        assert!(cb.len() + 1 <= 16);
        assert_eq!(cb.rate(), ((cb.len() + 1) as f64).log2() / 8.0);
        assert_eq!(cb.lookup(0).0, None);
        // Weights 1..=3 out of 8 are typical: 8 + 28 + 56 sequences.
        assert_eq!(cb.covering_radius_report().targets, 92);
    }

    #[test]
    fn packed_cover_matches_direct_comparison() {
        let levels: Vec<u8> = (0..3 * 75u32).map(|i| (i * 37 % 128) as u8).collect();
        for level in [0u8, 5, 64, 126, 127] {
            let covers = covers_at(&levels, 75, level);
            for (row, bits) in levels.chunks(75).zip(&covers) {
                for (s, &l) in row.iter().enumerate() {
                    assert_eq!(bits[s / 64] >> (s % 64) & 1 == 1, l <= level);
                }
            }
        }
    }

    #[test]
    fn binary_level_table_matches_generic_distance() {
        let space = SequenceSpace::new(2, 7).unwrap();
        let v = Channel::from_rows(vec![vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let mut xs = Vec::new();
        for i in 0..128 {
            pack_into(&space.sequence(i), 2, &mut xs);
        }
        let pool: Vec<u64> = (0..128).step_by(5).collect();
        let fast = cover_levels(space, &xs, &pool, &v);
        let jd = JointDistance::new(&v, 7);
        let (mut joint, mut rest) = (vec![0; 4], vec![0; 2]);
        let mut i = 0;
        for &ci in &pool {
            let c = pack(&space.sequence(ci), 2);
            let cc = type_counts(&c)
                .iter()
                .map(|&v| v as u32)
                .collect::<Vec<_>>();
            for x in xs.chunks(2) {
                let xc = [x[0].count_ones(), x[1].count_ones()];
                let d = jd.distance(x, &xc, &c, &cc, &mut joint, &mut rest);
                assert_eq!(fast[i], level_of(d));
                i += 1;
            }
        }
    }

    #[test]
    fn ternary_cover_is_complete() {
        let p = Pmf::new(vec![0.6, 0.2, 0.2]).unwrap();
        let h = DistortionMatrix::hamming(3).unwrap();
        let dr = distortion_rate(&p, &h, 0.6, 1e-6).unwrap();
        let cb =
            build_codebook(5, &p, &dr.achieving_channel, 0.6, &h, &Default::default()).unwrap();
        assert!(cb.len() <= 8);
        assert_eq!(cb.covering_radius_report().covered, 243);
    }

    #[test]
    fn oversized_space_is_rejected() {
        let half = Pmf::uniform(2).unwrap();
        assert!(matches!(
            build_codebook(
                21,
                &half,
                &Channel::identity(2),
                0.5,
                &hamming2(),
                &Default::default()
            ),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
