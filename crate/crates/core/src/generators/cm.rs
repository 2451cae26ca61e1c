use rand::seq::SliceRandom;

use super::{Generated, Provenance};
use crate::error::{Error, Result};
use crate::graph::{check_graphical, DegreeSequence, Graph};
use crate::seed;

pub const DEFAULT_MAX_RETRIES: usize = 1000;

/// Uniform simple graph with the given degrees: uniform half-edge matchings
/// are redrawn until one has no loops or multi-edges.
///
/// After `max_retries` failed matchings the last one is erased (loops and
/// repeated edges dropped) and the provenance carries `erased = true`.
pub fn gen_cm_simple(d: &DegreeSequence, seed: u64, max_retries: usize) -> Result<Generated> {
    if d.sum() % 2 == 1 {
        return Err(Error::OddDegreeSum);
    }
    if !check_graphical(d) {
        return Err(Error::NonGraphical);
    }
    let n = d.len();
    let mut stubs: Vec<u32> = Vec::with_capacity(d.sum());
    for (v, &k) in d.degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as u32, k));
    }
    let mut rng = seed::rng(seed);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(stubs.len() / 2);
    let attempts = max_retries.max(1);
    for attempt in 1..=attempts {
        stubs.shuffle(&mut rng);
        pairs.clear();
        pairs.extend(stubs.chunks_exact(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))));
        pairs.sort_unstable();
        let simple = pairs.iter().all(|&(u, v)| u != v) && pairs.windows(2).all(|w| w[0] != w[1]);
        if simple {
            return Ok(Generated::new(
                Graph::from_canonical(n, pairs),
                Provenance::new("cm", seed).with_attempts(attempt),
            ));
        }
    }
    pairs.retain(|&(u, v)| u != v);
    pairs.dedup();
    let mut prov = Provenance::new("cm", seed).with_attempts(attempts);
    prov.erased = true;
    Ok(Generated::new(Graph::from_canonical(n, pairs), prov))
}

/// Uniform simple `d`-regular graph on `n` vertices.
pub fn gen_k_regular(d: usize, n: usize, seed: u64) -> Result<Generated> {
    if (d * n) % 2 == 1 {
        return Err(Error::OddDegreeSum);
    }
    if d >= n && !(d == 0 && n == 0) {
        return Err(Error::InvalidParameter(format!(
            "degree {d} needs more than {n} vertices"
        )));
    }
    let mut out = gen_cm_simple(&DegreeSequence::regular(d, n), seed, DEFAULT_MAX_RETRIES)?;
    out.provenance.model = "k_regular".into();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn single_edge() {
        for seed in 0..5 {
            let g = gen_cm_simple(&DegreeSequence::new(vec![1, 1]), seed, 10).unwrap().graph;
            assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        }
    }

    #[test]
    fn unique_realizations() {
        for seed in 0..20 {
            let tri = gen_cm_simple(&DegreeSequence::new(vec![2, 2, 2]), seed, 1000).unwrap();
            assert_eq!(tri.graph, Graph::complete(3));
            assert!(!tri.provenance.erased);
            let k4 = gen_cm_simple(&DegreeSequence::new(vec![3, 3, 3, 3]), seed, 1000).unwrap();
            assert_eq!(k4.graph, Graph::complete(4));
            let c4 = gen_cm_simple(&DegreeSequence::new(vec![2, 2, 2, 2]), seed, 1000).unwrap();
            assert!(c4.graph.degrees().iter().all(|&k| k == 2));
            assert!(c4.graph.is_connected());
        }
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(matches!(
            gen_cm_simple(&DegreeSequence::new(vec![3, 1]), 0, 10),
            Err(Error::NonGraphical)
        ));
        assert!(matches!(
            gen_cm_simple(&DegreeSequence::new(vec![1, 1, 1]), 0, 10),
            Err(Error::OddDegreeSum)
        ));
    }

    #[test]
    fn k_regular_cases() {
        let g = gen_k_regular(2, 5, 3).unwrap().graph;
        assert!(g.degrees().iter().all(|&k| k == 2));
        assert_eq!(g.m(), 5);
        assert_eq!(gen_k_regular(3, 4, 3).unwrap().graph, Graph::complete(4));
        assert!(matches!(gen_k_regular(3, 5, 3), Err(Error::OddDegreeSum)));
        assert!(gen_k_regular(4, 4, 3).is_err());
    }

    #[test]
    fn large_regular_degrees_exact() {
        let out = gen_k_regular(3, 100_000, 11).unwrap();
        assert!(!out.provenance.erased);
        assert!(out.graph.degrees().iter().all(|&k| k == 3));
        assert_eq!(out.graph.m(), 150_000);
    }

    #[test]
    fn erased_fallback_is_flagged() {
        // a dense sequence whose matchings are almost never simple
        let d = DegreeSequence::regular(12, 14);
        let out = gen_cm_simple(&d, 1, 3).unwrap();
        assert!(out.provenance.erased);
        assert!(out.graph.degrees().iter().all(|&k| k <= 12));
    }

    /// Every labeled simple graph with the given degrees, as canonical edge lists.
    fn realizations(degrees: &[usize]) -> Vec<Vec<(usize, usize)>> {
        let n = degrees.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let mut out = Vec::new();
        for mask in 0u32..1 << pairs.len() {
            let mut deg = vec![0; n];
            let mut edges = Vec::new();
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    deg[u] += 1;
                    deg[v] += 1;
                    edges.push((u, v));
                }
            }
            if deg == degrees {
                out.push(edges);
            }
        }
        out
    }

    fn assert_uniform(degrees: &[usize], draws: usize) {
        let support = realizations(degrees);
        assert!(support.len() > 1);
        let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let d = DegreeSequence::new(degrees.to_vec());
        for s in 0..draws as u64 {
            let g = gen_cm_simple(&d, seed::substream(99, s), 1000).unwrap().graph;
            *counts.entry(g.edges().collect()).or_default() += 1;
        }
        assert_eq!(counts.len(), support.len(), "every realization appears");
        let p = 1.0 / support.len() as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for r in &support {
            let c = counts[r] as f64;
            assert!(
                (c - draws as f64 * p).abs() <= 3.0 * sigma + 1.0,
                "{degrees:?}: count {c} vs expected {}",
                draws as f64 * p
            );
        }
    }

    #[test]
    fn uniform_over_perfect_matchings() {
        assert_uniform(&[1, 1, 1, 1], 100_000);
    }

    #[test]
    fn uniform_over_six_vertex_realizations() {
        // 70 labeled realizations: 60 six-cycles and 10 pairs of triangles
        assert_eq!(realizations(&[2, 2, 2, 2, 2, 2]).len(), 70);
        assert_uniform(&[2, 2, 2, 2, 2, 2], 100_000);
        assert_uniform(&[3, 2, 2, 1, 1, 1], 100_000);
    }
}
