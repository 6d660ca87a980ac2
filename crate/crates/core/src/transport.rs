//! The transport distance `rho_bar(p, q)`: minimal expected distortion over
//! couplings of `p` and `q`.
//!
//! [`rho_bar`] solves the transportation problem with the transportation
//! simplex (northwest-corner start, Bland's rule). [`dual_vertices`] lists the
//! vertices of the dual polyhedron `{alpha(x) + beta(y) <= rho(x, y)}` so that
//! `rho_bar(., q)` is the maximum of finitely many linear functions.

use std::collections::{BTreeMap, VecDeque};

use itertools::Itertools;
use serde::Serialize;

use crate::info::{DistortionMatrix, Pmf};
use crate::{Error, Result};

/// Reduced costs below `-PIVOT_EPS` enter the basis.
const PIVOT_EPS: f64 = 1e-12;
/// Dual feasibility slack for enumerated vertices.
const DUAL_SLACK: f64 = 1e-9;
/// Quantum used to compare dual vertices.
const DEDUP_QUANTUM: f64 = 1e-9;
/// Maximal number of `(m+n-1)`-edge subsets examined by [`dual_vertices`].
pub const SPANNING_TREE_BUDGET: u128 = 30_000_000;

/// A joint pmf with prescribed marginals and its expected distortion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    joint: Vec<f64>,
    value: f64,
}

impl Coupling {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.cols + y]
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.joint
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for r in self.joint.chunks(self.cols) {
            for (acc, v) in s.iter_mut().zip(r) {
                *acc += v;
            }
        }
        s
    }
}

/// A vertex of the dual polyhedron with `alpha(0) = 0`.
///
/// The linear piece it defines is `p -> sum_x alpha(x) p(x) + offset_on_py`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualVertex {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub offset_on_py: f64,
}

impl DualVertex {
    pub fn value_at(&self, p: &Pmf) -> f64 {
        self.alpha
            .iter()
            .zip(p.probs())
            .map(|(a, w)| a * w)
            .sum::<f64>()
            + self.offset_on_py
    }

    /// `alpha(x) + offset_on_py`, the piece as a per-letter score.
    pub fn gains(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a + self.offset_on_py).collect()
    }
}

fn check_dims(p: &Pmf, q: &Pmf, rho: &DistortionMatrix) -> Result<()> {
    if p.len() != rho.rows() {
        return Err(Error::DimensionMismatch {
            what: "first pmf vs distortion rows",
            expected: rho.rows(),
            got: p.len(),
        });
    }
    if q.len() != rho.cols() {
        return Err(Error::DimensionMismatch {
            what: "second pmf vs distortion columns",
            expected: rho.cols(),
            got: q.len(),
        });
    }
    Ok(())
}

/// `rho_bar(p, q)` and an optimal coupling.
pub fn rho_bar(p: &Pmf, q: &Pmf, rho: &DistortionMatrix) -> Result<(f64, Coupling)> {
    let (coupling, _) = rho_bar_with_dual(p, q, rho)?;
    Ok((coupling.value, coupling))
}

/// Optimal coupling together with an optimal dual solution (`alpha(0) = 0`).
pub fn rho_bar_with_dual(
    p: &Pmf,
    q: &Pmf,
    rho: &DistortionMatrix,
) -> Result<(Coupling, DualVertex)> {
    check_dims(p, q, rho)?;
    let mut t = Tableau::northwest(p.probs(), q.probs());
    let (alpha, beta) = t.solve(rho);
    let joint = t.flow;
    let value = joint
        .iter()
        .enumerate()
        .map(|(k, f)| f * rho.get(k / t.n, k % t.n))
        .sum::<f64>()
        .max(0.0);
    let offset_on_py = beta.iter().zip(q.probs()).map(|(b, w)| b * w).sum();
    Ok((
        Coupling {
            rows: t.m,
            cols: t.n,
            joint,
            value,
        },
        DualVertex {
            alpha,
            beta,
            offset_on_py,
        },
    ))
}

/// Hamming specialization: `rho_bar(p, q) = 1/2 ||p - q||_1`.
pub fn rho_bar_hamming(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "pmf sizes in rho_bar_hamming",
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Transportation simplex state. Basic cells form a spanning tree of the
/// bipartite graph rows + columns.
struct Tableau {
    m: usize,
    n: usize,
    flow: Vec<f64>,
    basis: Vec<(usize, usize)>,
}

impl Tableau {
    fn northwest(p: &[f64], q: &[f64]) -> Self {
        let (m, n) = (p.len(), q.len());
        let mut supply = p.to_vec();
        let mut demand = q.to_vec();
        let mut flow = vec![0.0; m * n];
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let f = supply[i].min(demand[j]).max(0.0);
            flow[i * n + j] = f;
            basis.push((i, j));
            supply[i] -= f;
            demand[j] -= f;
            if i == m - 1 && j == n - 1 {
                break;
            }
            // Exhausted row moves down; otherwise move right. The last row
            // absorbs the remaining columns.
            if (supply[i] <= demand[j] && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Leftover rounding mass lands in the final cell.
        let resid: f64 = supply.iter().sum::<f64>();
        flow[m * n - 1] = (flow[m * n - 1] + resid).max(0.0);
        debug_assert_eq!(basis.len(), m + n - 1);
        Self { m, n, flow, basis }
    }

    /// Potentials with `u(0) = 0` from the basic cells.
    fn potentials(&self, rho: &DistortionMatrix) -> (Vec<f64>, Vec<f64>) {
        tree_potentials(self.m, self.n, &self.basis, rho)
            .expect("simplex basis is always a spanning tree")
    }

    /// Pivots to optimality and returns the final potentials.
    fn solve(&mut self, rho: &DistortionMatrix) -> (Vec<f64>, Vec<f64>) {
        let cap = 50 * (self.m * self.n).pow(2) + 1000;
        for _ in 0..cap {
            let (u, v) = self.potentials(rho);
            let entering = (0..self.m)
                .cartesian_product(0..self.n)
                .find(|&(i, j)| rho.get(i, j) - u[i] - v[j] < -PIVOT_EPS);
            let Some((ei, ej)) = entering else {
                return (u, v);
            };
            self.pivot(ei, ej);
        }
        self.potentials(rho)
    }

    fn pivot(&mut self, ei: usize, ej: usize) {
        // Path in the tree from row node ei to column node m+ej, as basis
        // indices. Alternate cells along it lose flow.
        let path = self.tree_path(ei, self.m + ej);
        let mut leave: Option<usize> = None;
        for (k, &b) in path.iter().enumerate() {
            if k % 2 == 0 {
                let (i, j) = self.basis[b];
                let f = self.flow[i * self.n + j];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let (li, lj) = self.basis[l];
                        let lf = self.flow[li * self.n + lj];
                        f < lf || (f == lf && (i, j) < (li, lj))
                    }
                };
                if better {
                    leave = Some(b);
                }
            }
        }
        let leave = leave.expect("cycle has a decreasing cell");
        let (li, lj) = self.basis[leave];
        let theta = self.flow[li * self.n + lj];
        for (k, &b) in path.iter().enumerate() {
            let (i, j) = self.basis[b];
            let cell = &mut self.flow[i * self.n + j];
            if k % 2 == 0 {
                *cell = (*cell - theta).max(0.0);
            } else {
                *cell += theta;
            }
        }
        self.flow[li * self.n + lj] = 0.0;
        self.flow[ei * self.n + ej] = theta;
        self.basis[leave] = (ei, ej);
    }

    /// Basis indices on the tree path from `from` to `to`, listed starting
    /// at the `to` end. Nodes `< m` are rows, the rest columns.
    fn tree_path(&self, from: usize, to: usize) -> Vec<usize> {
        let nodes = self.m + self.n;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (b, &(i, j)) in self.basis.iter().enumerate() {
            adj[i].push((self.m + j, b));
            adj[self.m + j].push((i, b));
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(a) = queue.pop_front() {
            if a == to {
                break;
            }
            for &(b, edge) in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    parent[b] = Some((a, edge));
                    queue.push_back(b);
                }
            }
        }
        let mut path = Vec::new();
        let mut at = to;
        while at != from {
            let (prev, edge) = parent[at].expect("basis spans all nodes");
            path.push(edge);
            at = prev;
        }
        path
    }
}

/// Solves `u(i) + v(j) = rho(i, j)` on the edges of a spanning tree of the
/// bipartite graph, with `u(0) = 0`. `None` if the edges do not span.
fn tree_potentials(
    m: usize,
    n: usize,
    edges: &[(usize, usize)],
    rho: &DistortionMatrix,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut u: Vec<Option<f64>> = vec![None; m];
    let mut v: Vec<Option<f64>> = vec![None; n];
    u[0] = Some(0.0);
    let mut assigned = 1;
    let mut progress = true;
    while progress && assigned < m + n {
        progress = false;
        for &(i, j) in edges {
            match (u[i], v[j]) {
                (Some(a), None) => {
                    v[j] = Some(rho.get(i, j) - a);
                    assigned += 1;
                    progress = true;
                }
                (None, Some(b)) => {
                    u[i] = Some(rho.get(i, j) - b);
                    assigned += 1;
                    progress = true;
                }
                _ => {}
            }
        }
    }
    if assigned < m + n {
        return None;
    }
    Some((
        u.into_iter().map(Option::unwrap).collect(),
        v.into_iter().map(Option::unwrap).collect(),
    ))
}

fn is_spanning_tree(m: usize, n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for &(i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All vertices of `{alpha(x) + beta(y) <= rho(x, y), alpha(0) = 0}`, one per
/// distinct linear piece `p -> sum alpha p + sum beta q`.
///
/// Vertices are basic dual solutions of spanning trees of the complete
/// bipartite graph that are dual feasible. Two vertices giving the same piece
/// on `q` are merged. The list is sorted, so the result is deterministic.
/// Fails with [`Error::BudgetExceeded`] when the number of edge subsets to
/// examine exceeds [`SPANNING_TREE_BUDGET`].
pub fn dual_vertices(rho: &DistortionMatrix, q: &Pmf) -> Result<Vec<DualVertex>> {
    let (m, n) = (rho.rows(), rho.cols());
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            what: "query pmf vs distortion columns",
            expected: n,
            got: q.len(),
        });
    }
    let subsets = binomial((m * n) as u128, (m + n - 1) as u128);
    if subsets > SPANNING_TREE_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{subsets} candidate bases for a {m}x{n} distortion matrix"
        )));
    }
    let cells: Vec<(usize, usize)> = (0..m).cartesian_product(0..n).collect();
    let mut found: BTreeMap<Vec<i64>, DualVertex> = BTreeMap::new();
    for edges in cells.iter().copied().combinations(m + n - 1) {
        if !is_spanning_tree(m, n, &edges) {
            continue;
        }
        let Some((alpha, beta)) = tree_potentials(m, n, &edges, rho) else {
            continue;
        };
        let feasible = (0..m)
            .cartesian_product(0..n)
            .all(|(i, j)| alpha[i] + beta[j] <= rho.get(i, j) + DUAL_SLACK);
        if !feasible {
            continue;
        }
        let offset_on_py: f64 = beta.iter().zip(q.probs()).map(|(b, w)| b * w).sum();
        let key: Vec<i64> = alpha
            .iter()
            .chain(std::iter::once(&offset_on_py))
            .map(|v| (v / DEDUP_QUANTUM).round() as i64)
            .collect();
        found.entry(key).or_insert(DualVertex {
            alpha,
            beta,
            offset_on_py,
        });
    }
    Ok(found.into_values().collect())
}

/// `max_v [sum_x alpha_v(x) p(x) + offset_v]` over a vertex list.
pub fn max_of_pieces(vertices: &[DualVertex], p: &Pmf) -> f64 {
    vertices
        .iter()
        .map(|v| v.value_at(p))
        .fold(f64::NEG_INFINITY, f64::max)
}
