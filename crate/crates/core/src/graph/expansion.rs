//! Large-set expansion: the minimum of `e(A, V∖A) / |A|` (edge mode) or
//! `δ_out(A) / |A|` (vertex mode) over `ceil(εn) <= |A| <= floor(n/2)`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};
use crate::seed;

/// Largest vertex count handled by [`expansion_exact`].
pub const EXACT_EXPANSION_CAP: usize = 20;

/// Above this size the Fiedler vector comes from power iteration instead of a
/// dense eigendecomposition.
const DENSE_EIGEN_LIMIT: usize = 400;
const POWER_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionMode {
    Edge,
    Vertex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub epsilon: f64,
    pub mode: ExpansionMode,
    /// Boundary count of the witness.
    pub numerator: usize,
    /// `|witness|`.
    pub denominator: usize,
    pub value: f64,
    pub witness: Vec<usize>,
    /// True only when the value is the certified minimum.
    pub exact: bool,
}

/// Number of edges with exactly one endpoint in `set`.
pub fn edge_boundary(g: &Graph, set: &[usize]) -> usize {
    let inside = membership(g, set);
    (0..g.n())
        .filter(|&u| inside[u])
        .map(|u| g.neighbors(u).iter().filter(|&&w| !inside[w as usize]).count())
        .sum()
}

/// Number of vertices outside `set` with a neighbor inside.
pub fn vertex_boundary(g: &Graph, set: &[usize]) -> usize {
    let inside = membership(g, set);
    let mut hit = vec![false; g.n()];
    let mut count = 0;
    for u in 0..g.n() {
        if !inside[u] {
            continue;
        }
        for &w in g.neighbors(u) {
            let w = w as usize;
            if !inside[w] && !hit[w] {
                hit[w] = true;
                count += 1;
            }
        }
    }
    count
}

fn membership(g: &Graph, set: &[usize]) -> Vec<bool> {
    let mut inside = vec![false; g.n()];
    for &v in set {
        inside[v] = true;
    }
    inside
}

fn size_window(n: usize, eps: f64) -> Result<(usize, usize)> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {eps}"
        )));
    }
    // εn is often an integer computed inexactly (n/3 * 3); do not round it up.
    let lo = ((eps * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let hi = n / 2;
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "no subset size in [{lo}, {hi}] for n = {n}, epsilon = {eps}"
        )));
    }
    Ok((lo, hi))
}

fn better(num: usize, den: usize, best_num: usize, best_den: usize) -> bool {
    (num as u128) * (best_den as u128) < (best_num as u128) * (den as u128)
}

fn report(
    eps: f64,
    mode: ExpansionMode,
    numerator: usize,
    witness: Vec<usize>,
    exact: bool,
) -> ExpansionReport {
    let denominator = witness.len();
    ExpansionReport {
        epsilon: eps,
        mode,
        numerator,
        denominator,
        value: numerator as f64 / denominator as f64,
        witness,
        exact,
    }
}

/// Exact minimum by enumerating every subset in the size window.
pub fn expansion_exact(g: &Graph, eps: f64, mode: ExpansionMode) -> Result<ExpansionReport> {
    let n = g.n();
    if n > EXACT_EXPANSION_CAP {
        return Err(Error::ExpansionCap {
            n,
            cap: EXACT_EXPANSION_CAP,
        });
    }
    let (lo, hi) = size_window(n, eps)?;
    let (num, mask) = enumerate_min(g, lo, hi, mode);
    let witness = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
    Ok(report(eps, mode, num, witness, true))
}

fn enumerate_min(g: &Graph, lo: usize, hi: usize, mode: ExpansionMode) -> (usize, u32) {
    let n = g.n();
    let adj: Vec<u32> = (0..n)
        .map(|u| g.neighbors(u).iter().fold(0u32, |acc, &w| acc | 1 << w))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = (usize::MAX, 1usize, 0u32);
    for mask in 1..=full {
        let size = mask.count_ones() as usize;
        if size < lo || size > hi {
            continue;
        }
        let outside = full & !mask;
        let num = match mode {
            ExpansionMode::Edge => {
                let mut cut = 0;
                let mut rest = mask;
                while rest != 0 {
                    let u = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    cut += (adj[u] & outside).count_ones() as usize;
                }
                cut
            }
            ExpansionMode::Vertex => {
                let mut reach = 0u32;
                let mut rest = mask;
                while rest != 0 {
                    let u = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    reach |= adj[u];
                }
                (reach & outside).count_ones() as usize
            }
        };
        if best.0 == usize::MAX || better(num, size, best.0, best.1) {
            best = (num, size, mask);
        }
    }
    (best.0, best.2)
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Feasible witness from a Fiedler-vector sweep refined by randomized local
/// moves. The value is an upper bound on the true minimum.
///
/// When `budget` is at least the number of feasible subsets and the graph is
/// within [`EXACT_EXPANSION_CAP`], the search enumerates them instead.
pub fn expansion_heuristic(
    g: &Graph,
    eps: f64,
    mode: ExpansionMode,
    budget: usize,
    seed: u64,
) -> Result<ExpansionReport> {
    let n = g.n();
    let (lo, hi) = size_window(n, eps)?;
    if n <= EXACT_EXPANSION_CAP {
        let feasible: u128 = (lo..=hi).map(|s| binomial(n, s)).sum();
        if budget as u128 >= feasible {
            let (num, mask) = enumerate_min(g, lo, hi, mode);
            let witness = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            return Ok(report(eps, mode, num, witness, false));
        }
    }

    let mut rng = seed::rng(seed);
    let fiedler = fiedler_vector(g, &mut rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]).then(a.cmp(&b)));

    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    for direction in [false, true] {
        let mut state = CutState::new(g);
        let seq: Vec<usize> = if direction {
            order.iter().rev().copied().collect()
        } else {
            order.clone()
        };
        for (i, &v) in seq.iter().enumerate() {
            state.toggle(g, v);
            let size = i + 1;
            if size > hi {
                break;
            }
            if size >= lo {
                let num = state.numerator(mode);
                if best
                    .as_ref()
                    .is_none_or(|(bn, bs, _)| better(num, size, *bn, *bs))
                {
                    best = Some((num, size, state.inside.clone()));
                }
            }
        }
    }
    let (_, _, start) = best.expect("size window is nonempty");

    let mut state = CutState::new(g);
    for v in (0..n).filter(|&v| start[v]) {
        state.toggle(g, v);
    }
    let mut best_num = state.numerator(mode);
    let mut best_size = state.size;
    let mut best_set = state.inside.clone();
    let mut cur = (best_num, best_size);
    for _ in 0..budget {
        let v = rng.random_range(0..n);
        let w = rng.random_range(0..n);
        let swap = rng.random_bool(0.5) && state.inside[v] != state.inside[w];
        let new_size = if swap {
            state.size
        } else if state.inside[v] {
            state.size - 1
        } else {
            state.size + 1
        };
        if !swap && (new_size < lo || new_size > hi) {
            continue;
        }
        state.toggle(g, v);
        if swap {
            state.toggle(g, w);
        }
        let num = state.numerator(mode);
        if !better(cur.0, cur.1, num, new_size) {
            cur = (num, new_size);
            if better(num, new_size, best_num, best_size) {
                best_num = num;
                best_size = new_size;
                best_set.clone_from(&state.inside);
            }
        } else {
            if swap {
                state.toggle(g, w);
            }
            state.toggle(g, v);
        }
    }
    let witness = (0..n).filter(|&v| best_set[v]).collect();
    Ok(report(eps, mode, best_num, witness, false))
}

struct CutState {
    inside: Vec<bool>,
    /// Neighbors of each vertex that are inside.
    touching: Vec<u32>,
    size: usize,
    edge_cut: usize,
    vertex_cut: usize,
}

impl CutState {
    fn new(g: &Graph) -> CutState {
        CutState {
            inside: vec![false; g.n()],
            touching: vec![0; g.n()],
            size: 0,
            edge_cut: 0,
            vertex_cut: 0,
        }
    }

    fn numerator(&self, mode: ExpansionMode) -> usize {
        match mode {
            ExpansionMode::Edge => self.edge_cut,
            ExpansionMode::Vertex => self.vertex_cut,
        }
    }

    fn toggle(&mut self, g: &Graph, v: usize) {
        let deg = g.degree(v);
        let t = self.touching[v] as usize;
        if self.inside[v] {
            self.inside[v] = false;
            self.size -= 1;
            self.edge_cut = self.edge_cut + 2 * t - deg;
            for &w in g.neighbors(v) {
                let w = w as usize;
                self.touching[w] -= 1;
                if !self.inside[w] && self.touching[w] == 0 {
                    self.vertex_cut -= 1;
                }
            }
            if t > 0 {
                self.vertex_cut += 1;
            }
        } else {
            if t > 0 {
                self.vertex_cut -= 1;
            }
            self.inside[v] = true;
            self.size += 1;
            self.edge_cut = self.edge_cut + deg - 2 * t;
            for &w in g.neighbors(v) {
                let w = w as usize;
                self.touching[w] += 1;
                if !self.inside[w] && self.touching[w] == 1 {
                    self.vertex_cut += 1;
                }
            }
        }
    }
}

/// Eigenvector of the second-smallest Laplacian eigenvalue.
fn fiedler_vector(g: &Graph, rng: &mut impl Rng) -> Vec<f64> {
    let n = g.n();
    if n <= DENSE_EIGEN_LIMIT {
        let mut lap = DMatrix::<f64>::zeros(n, n);
        for (u, v) in g.edges() {
            lap[(u, v)] -= 1.0;
            lap[(v, u)] -= 1.0;
            lap[(u, u)] += 1.0;
            lap[(v, v)] += 1.0;
        }
        let eig = SymmetricEigen::new(lap);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let col = idx[1.min(n - 1)];
        return eig.eigenvectors.column(col).iter().copied().collect();
    }
    // Power iteration on cI - L restricted to the complement of the constant vector.
    let shift = 2.0 * g.max_degree() as f64 + 1.0;
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut y = vec![0.0; n];
    for _ in 0..POWER_ITERATIONS {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|xi| *xi -= mean);
        for (u, yu) in y.iter_mut().enumerate() {
            let lx = g.degree(u) as f64 * x[u]
                - g.neighbors(u).iter().map(|&w| x[w as usize]).sum::<f64>();
            *yu = shift * x[u] - lx;
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    x
}
