use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Generated, Provenance};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

/// Rejection counters for the distinct-targets conditioning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PaStats {
    /// m-tuples drawn, including rejected ones.
    pub tuples_drawn: u64,
    /// Arrivals, one accepted tuple each.
    pub arrivals: u64,
    /// Sum over arrivals of `b / (1 - b)` with the union bound
    /// `b = C(m,2) * maxdeg / (2|E|)` on the collision probability; bounds
    /// the expected number of rejected tuples.
    pub rejection_bound: f64,
}

impl PaStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.tuples_drawn == 0 {
            1.0
        } else {
            self.arrivals as f64 / self.tuples_drawn as f64
        }
    }
}

/// Conditional preferential attachment.
///
/// Starts from the complete graph on `m + 1` vertices. Each later vertex `t`
/// draws `m` targets i.i.d. with probability proportional to degree and
/// redraws the whole tuple until the targets are distinct. Vertex ids are
/// birth order.
pub fn gen_pa(m: usize, n: usize, seed: u64) -> Result<(Generated, PaStats)> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
    }
    if n < 2 * m + 1 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 2m + 1 = {}, got {n}",
            2 * m + 1
        )));
    }
    let mut rng = seed::rng(seed);
    let seed_size = m + 1;
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m * n);
    // Each vertex appears once per incident half-edge.
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * n);
    for u in 0..seed_size as u32 {
        for v in u + 1..seed_size as u32 {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut stats = PaStats::default();
    let mut targets = vec![0u32; m];
    let mut degree = vec![0usize; n];
    for &v in &endpoints {
        degree[v as usize] += 1;
    }
    let mut max_degree = m;
    let pairs = (m * (m - 1) / 2) as f64;
    for t in seed_size..n {
        let b = pairs * max_degree as f64 / endpoints.len() as f64;
        stats.rejection_bound += if b < 1.0 { b / (1.0 - b) } else { f64::INFINITY };
        loop {
            stats.tuples_drawn += 1;
            for slot in targets.iter_mut() {
                *slot = endpoints[rng.random_range(0..endpoints.len())];
            }
            let distinct = (1..m).all(|i| !targets[..i].contains(&targets[i]));
            if distinct {
                break;
            }
        }
        stats.arrivals += 1;
        for &w in &targets {
            edges.push((w, t as u32));
            endpoints.push(w);
            endpoints.push(t as u32);
            degree[w as usize] += 1;
            max_degree = max_degree.max(degree[w as usize]);
        }
        degree[t] = m;
    }
    edges.sort_unstable();
    let graph = Graph::from_canonical(n, edges);
    Ok((Generated::new(graph, Provenance::new("pa", seed)), stats))
}
