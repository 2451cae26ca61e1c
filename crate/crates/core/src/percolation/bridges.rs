//! k-bridges: open edges whose removal cuts the root's cluster off from
//! every vertex at graph distance `>= k`. Their expected number is `p` times
//! the derivative of `ζ̃_k(p) = P(cluster of root reaches distance k)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_probability, trial_stream};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;
use crate::stats::MeanEstimate;

/// Half-width of the central difference used to cross-check the pivotal rate.
pub const DEFAULT_FD_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub root: usize,
    pub k: usize,
    pub p: f64,
    pub trials: usize,
    pub bridge_count_mean: f64,
    pub bridge_count_se: f64,
    /// `bridge_count_mean / p`; `None` at `p = 0`.
    pub pivotal_rate: Option<f64>,
    pub pivotal_rate_se: Option<f64>,
    /// Estimate of `ζ̃_k(p)`.
    pub zeta_k: f64,
    pub zeta_k_se: f64,
    /// Central difference of `ζ̃_k` over `[p - h, p + h] ∩ [0, 1]` on shared tapes.
    pub fd_low: f64,
    pub fd_high: f64,
    pub fd_slope: f64,
    pub fd_slope_se: f64,
}

impl BridgeReport {
    pub const CSV_HEADER: &'static str = "root,k,p,trials,bridge_count_mean,bridge_count_se,pivotal_rate,pivotal_rate_se,zeta_k,zeta_k_se,fd_slope,fd_slope_se\n";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.root,
            self.k,
            self.p,
            self.trials,
            self.bridge_count_mean,
            self.bridge_count_se,
            opt(self.pivotal_rate),
            opt(self.pivotal_rate_se),
            self.zeta_k,
            self.zeta_k_se,
            self.fd_slope,
            self.fd_slope_se
        )
    }
}

struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    disc: Vec<u32>,
    low: Vec<u32>,
    far_below: Vec<u32>,
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        Scratch {
            stamp: vec![0; n],
            epoch: 0,
            disc: vec![0; n],
            low: vec![0; n],
            far_below: vec![0; n],
        }
    }
}

/// `(reaches distance k, number of k-bridges)` for one tape at threshold `p`.
fn scan_cluster(
    g: &Graph,
    root: usize,
    dist: &[usize],
    k: usize,
    open: impl Fn(usize) -> bool,
    s: &mut Scratch,
) -> (bool, usize) {
    s.epoch += 1;
    let epoch = s.epoch;
    // Iterative DFS: frames are (vertex, parent edge id, next adjacency index).
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
    let mut time = 0u32;
    s.stamp[root] = epoch;
    s.disc[root] = time;
    s.low[root] = time;
    s.far_below[root] = u32::from(dist[root] >= k);
    // tree edges (parent, child) closed in post-order
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    while let Some(frame) = stack.last_mut() {
        let (u, parent_edge, idx) = *frame;
        if idx < g.degree(u) {
            frame.2 += 1;
            let (w, e) = g.incident_at(u, idx);
            if e == parent_edge || !open(e) {
                continue;
            }
            if s.stamp[w] == epoch {
                s.low[u] = s.low[u].min(s.disc[w]);
            } else {
                time += 1;
                s.stamp[w] = epoch;
                s.disc[w] = time;
                s.low[w] = time;
                s.far_below[w] = u32::from(dist[w] >= k);
                stack.push((w, e, 0));
            }
        } else {
            stack.pop();
            if let Some(&(parent, _, _)) = stack.last() {
                s.low[parent] = s.low[parent].min(s.low[u]);
                s.far_below[parent] += s.far_below[u];
                tree_edges.push((parent, u));
            }
        }
    }
    let far_total = s.far_below[root];
    if far_total == 0 {
        return (false, 0);
    }
    let bridges = tree_edges
        .iter()
        .filter(|&&(parent, child)| s.low[child] > s.disc[parent] && s.far_below[child] == far_total)
        .count();
    (true, bridges)
}

/// Monte Carlo estimate of the expected number of k-bridges at the cluster
/// of `root`, the pivotal rate `E[#k-bridges] / p`, and a central-difference
/// slope of `ζ̃_k` for comparison.
pub fn pivotal_bridge_report(
    g: &Graph,
    root: usize,
    k: usize,
    p: f64,
    trials: usize,
    seed: u64,
    fd_step: f64,
) -> Result<BridgeReport> {
    g.check_vertex(root)?;
    check_probability(p)?;
    if k == 0 || trials == 0 {
        return Err(Error::InvalidParameter("need k >= 1 and trials >= 1".into()));
    }
    if !(fd_step > 0.0) {
        return Err(Error::InvalidParameter("finite-difference step must be positive".into()));
    }
    let dist = crate::graph::bfs_distances(g, root);
    let fd_low = (p - fd_step).max(0.0);
    let fd_high = (p + fd_step).min(1.0);
    let rows: Vec<(f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map_init(
            || Scratch::new(g.n()),
            |scratch, t| {
                let stream = trial_stream(seed, t);
                let u = |e: usize| seed::edge_uniform(stream, e);
                let (hit, bridges) = scan_cluster(g, root, &dist, k, |e| u(e) < p, scratch);
                let (hit_lo, _) = scan_cluster(g, root, &dist, k, |e| u(e) < fd_low, scratch);
                let (hit_hi, _) = scan_cluster(g, root, &dist, k, |e| u(e) < fd_high, scratch);
                let diff = (f64::from(u8::from(hit_hi)) - f64::from(u8::from(hit_lo)))
                    / (fd_high - fd_low);
                (bridges as f64, f64::from(u8::from(hit)), diff)
            },
        )
        .collect();
    let bridges = MeanEstimate::from_samples(rows.iter().map(|r| r.0));
    let zeta = MeanEstimate::from_samples(rows.iter().map(|r| r.1));
    let slope = MeanEstimate::from_samples(rows.iter().map(|r| r.2));
    let (pivotal_rate, pivotal_rate_se) = if p > 0.0 {
        (Some(bridges.mean / p), Some(bridges.std_err / p))
    } else {
        (None, None)
    };
    Ok(BridgeReport {
        root,
        k,
        p,
        trials,
        bridge_count_mean: bridges.mean,
        bridge_count_se: bridges.std_err,
        pivotal_rate,
        pivotal_rate_se,
        zeta_k: zeta.mean,
        zeta_k_se: zeta.std_err,
        fd_low,
        fd_high,
        fd_slope: slope.mean,
        fd_slope_se: slope.std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let g = Graph::path(2);
        let r = pivotal_bridge_report(&g, 0, 1, 0.4, 20_000, 1, DEFAULT_FD_STEP).unwrap();
        // the edge is a 1-bridge exactly when open
        assert_eq!(r.bridge_count_mean, r.zeta_k);
        assert!((r.zeta_k - 0.4).abs() < 0.015);
        assert!((r.pivotal_rate.unwrap() - 1.0).abs() < 0.04);
    }

    #[test]
    fn path_of_three_from_an_end() {
        let g = Graph::path(3);
        let p = 0.6;
        let r = pivotal_bridge_report(&g, 0, 2, p, 50_000, 2, DEFAULT_FD_STEP).unwrap();
        // both edges are 2-bridges exactly when both are open
        assert!((r.bridge_count_mean - 2.0 * p * p).abs() < 4.0 * r.bridge_count_se);
        assert!((r.zeta_k - p * p).abs() < 4.0 * r.zeta_k_se);
        assert!((r.pivotal_rate.unwrap() - 2.0 * p).abs() < 4.0 * r.pivotal_rate_se.unwrap());
    }

    #[test]
    fn cycle_has_no_bridges() {
        let g = Graph::cycle(8);
        let r = pivotal_bridge_report(&g, 0, 3, 1.0, 10, 0, DEFAULT_FD_STEP).unwrap();
        assert_eq!(r.bridge_count_mean, 0.0);
        assert_eq!(r.zeta_k, 1.0);
    }

    #[test]
    fn zero_probability_has_undefined_rate() {
        let g = Graph::path(3);
        let r = pivotal_bridge_report(&g, 0, 1, 0.0, 10, 0, DEFAULT_FD_STEP).unwrap();
        assert_eq!(r.pivotal_rate, None);
        assert!(r.csv_row().contains("NA"));
    }

    #[test]
    fn bridge_hanging_off_a_cycle() {
        // cycle 0..4 with a pendant path 0-4-5; root 1, far vertex only 5 (dist 3)
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5)]).unwrap();
        let mut s = Scratch::new(6);
        let dist = crate::graph::bfs_distances(&g, 1);
        let (hit, bridges) = scan_cluster(&g, 1, &dist, 3, |_| true, &mut s);
        assert!(hit);
        assert_eq!(bridges, 2);
        let (hit, bridges) = scan_cluster(&g, 1, &dist, 2, |_| true, &mut s);
        // far set {3, 4, 5}: 3 sits on the cycle, so no single edge separates them all
        assert!(hit);
        assert_eq!(bridges, 0);
    }
}
