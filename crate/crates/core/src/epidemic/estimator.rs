//! The local estimator: average the answers of `q` independent local
//! queries at uniformly random vertices.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{probe, ProbeScratch, SuccessRule, TransmissionParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::percolation::check_probability;
use crate::seed;

/// Queries whose pairwise ball overlap is measured by default.
pub const DEFAULT_OVERLAP_SAMPLE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub rule: SuccessRule,
    /// Number of leading queries whose `k`-balls are checked pairwise for
    /// overlap; 0 disables the diagnostic.
    pub overlap_sample: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            rule: SuccessRule::SeedCounted,
            overlap_sample: DEFAULT_OVERLAP_SAMPLE,
        }
    }
}

/// Pairs among the sampled queries whose `k`-balls intersect, i.e. whose
/// start vertices are within distance `2k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapDiagnostic {
    pub queries_checked: usize,
    pub pairs: usize,
    pub overlapping_pairs: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRow {
    pub index: usize,
    pub vertex: usize,
    pub hit: bool,
    /// `|R|`, capped at the hit threshold.
    pub recovered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub k: usize,
    pub q: usize,
    pub p: f64,
    pub rule: SuccessRule,
    pub successes: usize,
    pub n_tilde: f64,
    /// 95% normal-approximation binomial halfwidth.
    pub halfwidth: f64,
    pub master_seed: u64,
    pub overlap: Option<OverlapDiagnostic>,
    /// Proposals accepted per proposal, for degree-biased seeding.
    pub acceptance_rate: Option<f64>,
    #[serde(skip)]
    pub queries: Vec<QueryRow>,
}

impl EstimatorReport {
    /// CSV with columns `query,vertex,hit,recovered`.
    pub fn queries_csv(&self) -> String {
        let mut out = String::from("query,vertex,hit,recovered\n");
        for r in &self.queries {
            out.push_str(&format!("{},{},{},{}\n", r.index, r.vertex, u8::from(r.hit), r.recovered));
        }
        out
    }
}

/// Seed of query `i`: the start vertex is drawn from `rng(substream(s, 1))`
/// and the transmission tape is `substream(s, 0)`.
fn query_seed(master: u64, i: usize) -> u64 {
    seed::substream(master, i as u64)
}

fn check_args(g: &Graph, k: usize, q: usize, params: TransmissionParams) -> Result<()> {
    check_probability(params.p)?;
    if k == 0 || q == 0 {
        return Err(Error::InvalidParameter("need k >= 1 and q >= 1".into()));
    }
    if g.n() == 0 {
        return Err(Error::InvalidParameter("graph has no vertices".into()));
    }
    Ok(())
}

/// Query start vertex and the number of proposals it took.
type StartSampler<'a> = dyn Fn(&mut rand_chacha::ChaCha8Rng) -> (usize, u64) + Sync + 'a;

fn run_queries(
    g: &Graph,
    k: usize,
    q: usize,
    params: TransmissionParams,
    master_seed: u64,
    options: EstimateOptions,
    sampler: &StartSampler<'_>,
) -> (EstimatorReport, u64) {
    let threshold = options.rule.threshold(k);
    let rows: Vec<(QueryRow, u64)> = (0..q)
        .into_par_iter()
        .map_init(
            || ProbeScratch::new(g.n()),
            |scratch, i| {
                let s = query_seed(master_seed, i);
                let mut rng = seed::rng(seed::substream(s, 1));
                let (vertex, proposals) = sampler(&mut rng);
                let recovered = probe(g, vertex, threshold, params.p, seed::substream(s, 0), scratch);
                let row = QueryRow {
                    index: i,
                    vertex,
                    hit: recovered >= threshold,
                    recovered,
                };
                (row, proposals)
            },
        )
        .collect();
    let proposals: u64 = rows.iter().map(|r| r.1).sum();
    let queries: Vec<QueryRow> = rows.into_iter().map(|r| r.0).collect();
    let successes = queries.iter().filter(|r| r.hit).count();
    let n_tilde = successes as f64 / q as f64;
    let overlap = (options.overlap_sample > 0).then(|| {
        let starts: Vec<usize> = queries.iter().take(options.overlap_sample).map(|r| r.vertex).collect();
        overlap_diagnostic(g, &starts, k)
    });
    let report = EstimatorReport {
        k,
        q,
        p: params.p,
        rule: options.rule,
        successes,
        n_tilde,
        halfwidth: 1.96 * (n_tilde * (1.0 - n_tilde) / q as f64).sqrt(),
        master_seed,
        overlap,
        acceptance_rate: None,
        queries,
    };
    (report, proposals)
}

/// `Ñ(k, q)`: fraction of `q` local queries from uniform random vertices that
/// infect at least `k` vertices inside the `k`-ball.
pub fn estimate(
    g: &Graph,
    k: usize,
    q: usize,
    params: TransmissionParams,
    master_seed: u64,
    options: EstimateOptions,
) -> Result<EstimatorReport> {
    check_args(g, k, q, params)?;
    let n = g.n();
    let sampler = move |rng: &mut rand_chacha::ChaCha8Rng| (rng.random_range(0..n), 1);
    Ok(run_queries(g, k, q, params, master_seed, options, &sampler).0)
}

/// As [`estimate`], but start vertices are drawn proportionally to degree by
/// rejection: propose uniformly, accept with probability `deg / max_deg`.
pub fn estimate_degree_biased(
    g: &Graph,
    k: usize,
    q: usize,
    params: TransmissionParams,
    master_seed: u64,
    options: EstimateOptions,
) -> Result<EstimatorReport> {
    check_args(g, k, q, params)?;
    let max_deg = g.max_degree();
    if max_deg == 0 {
        return Err(Error::InvalidParameter("graph has no edges".into()));
    }
    let n = g.n();
    let sampler = move |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut proposals = 0;
        loop {
            proposals += 1;
            let v = rng.random_range(0..n);
            if rng.random::<f64>() * (max_deg as f64) < g.degree(v) as f64 {
                return (v, proposals);
            }
        }
    };
    let (mut report, proposals) = run_queries(g, k, q, params, master_seed, options, &sampler);
    report.acceptance_rate = Some(q as f64 / proposals as f64);
    Ok(report)
}

fn overlap_diagnostic(g: &Graph, starts: &[usize], k: usize) -> OverlapDiagnostic {
    let mut positions: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &v) in starts.iter().enumerate() {
        positions.entry(v).or_default().push(i);
    }
    let radius = 2 * k;
    let counts: Vec<usize> = (0..starts.len())
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; g.n()], Vec::<u32>::new()),
            |(dist, frontier), i| {
                frontier.clear();
                frontier.push(starts[i] as u32);
                dist[starts[i]] = 0;
                let mut head = 0;
                let mut found = 0;
                while head < frontier.len() {
                    let u = frontier[head] as usize;
                    head += 1;
                    if let Some(js) = positions.get(&u) {
                        found += js.iter().filter(|&&j| j > i).count();
                    }
                    if dist[u] as usize == radius {
                        continue;
                    }
                    for &w in g.neighbors(u) {
                        if dist[w as usize] == u32::MAX {
                            dist[w as usize] = dist[u] + 1;
                            frontier.push(w);
                        }
                    }
                }
                for &u in frontier.iter() {
                    dist[u as usize] = u32::MAX;
                }
                found
            },
        )
        .collect();
    let c = starts.len();
    let pairs = c * c.saturating_sub(1) / 2;
    let overlapping_pairs: usize = counts.iter().sum();
    OverlapDiagnostic {
        queries_checked: c,
        pairs,
        overlapping_pairs,
        fraction: if pairs == 0 {
            0.0
        } else {
            overlapping_pairs as f64 / pairs as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveStage {
    pub k: usize,
    pub q: usize,
    pub n_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveReport {
    pub report: EstimatorReport,
    pub schedule: Vec<AdaptiveStage>,
    /// False when `k` outgrew the vertex count before two successive
    /// estimates agreed; the last estimate is returned as best effort.
    pub converged: bool,
}

pub const ADAPTIVE_START_K: usize = 8;

/// Doubles `k` from 8 until successive estimates differ by less than
/// `eps / 2`, using `q = ceil(8 / eps²)` queries per stage. All stages share
/// the master seed, hence the same start vertices and tapes.
pub fn adaptive_estimate(
    g: &Graph,
    eps: f64,
    params: TransmissionParams,
    master_seed: u64,
    options: EstimateOptions,
) -> Result<AdaptiveReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let q = (8.0 / (eps * eps)).ceil() as usize;
    let no_overlap = EstimateOptions {
        overlap_sample: 0,
        ..options
    };
    let mut k = ADAPTIVE_START_K;
    let mut schedule = Vec::new();
    let mut prev = estimate(g, k, q, params, master_seed, no_overlap)?;
    schedule.push(AdaptiveStage {
        k,
        q,
        n_tilde: prev.n_tilde,
    });
    loop {
        let next_k = 2 * k;
        if next_k > g.n().max(ADAPTIVE_START_K) {
            let report = estimate(g, k, q, params, master_seed, options)?;
            return Ok(AdaptiveReport {
                report,
                schedule,
                converged: false,
            });
        }
        let cur = estimate(g, next_k, q, params, master_seed, no_overlap)?;
        schedule.push(AdaptiveStage {
            k: next_k,
            q,
            n_tilde: cur.n_tilde,
        });
        k = next_k;
        if (cur.n_tilde - prev.n_tilde).abs() < eps / 2.0 {
            let report = if options.overlap_sample > 0 {
                estimate(g, k, q, params, master_seed, options)?
            } else {
                cur
            };
            return Ok(AdaptiveReport {
                report,
                schedule,
                converged: true,
            });
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epidemic::local_query;
    use crate::generators::{gen_k_regular, gen_pa};
    use proptest::prelude::*;
    use rand::Rng;

    fn params(p: f64) -> TransmissionParams {
        TransmissionParams::from_p(p).unwrap()
    }

    #[test]
    fn full_transmission_on_connected_graph() {
        let g = gen_k_regular(3, 500, 1).unwrap().graph;
        let r = estimate(&g, 50, 300, params(1.0), 3, EstimateOptions::default()).unwrap();
        assert_eq!(r.n_tilde, 1.0);
        assert_eq!(r.halfwidth, 0.0);
        assert_eq!(r.overlap.unwrap().queries_checked, 200);
    }

    #[test]
    fn monotone_in_k_on_shared_tapes() {
        let g = gen_k_regular(3, 5000, 4).unwrap().graph;
        let mut prev = 1.0;
        for k in [1, 2, 4, 8, 16, 32, 64] {
            let r = estimate(&g, k, 500, params(0.6), 8, EstimateOptions::default()).unwrap();
            assert!(r.n_tilde <= prev);
            prev = r.n_tilde;
        }
    }

    #[test]
    fn fast_probe_agrees_with_literal_query() {
        let g = gen_pa(2, 400, 2).unwrap().0.graph;
        let mut scratch = ProbeScratch::new(g.n());
        for i in 0..400u64 {
            let v = (i as usize * 7) % g.n();
            let k = 1 + (i as usize % 12);
            let p = 0.2 + 0.6 * (i % 5) as f64 / 4.0;
            let stream = seed::substream(17, i);
            for rule in [SuccessRule::SeedCounted, SuccessRule::OthersCounted] {
                let literal = local_query(&g, v, k, params(p), stream, rule).unwrap();
                let t = rule.threshold(k);
                let fast = probe(&g, v, t, p, stream, &mut scratch);
                assert_eq!(literal.hit, fast >= t);
                assert_eq!(literal.recovered.min(t), fast);
            }
        }
    }

    #[test]
    fn overlap_counts_on_a_path() {
        let g = Graph::path(20);
        // k = 1: balls overlap iff starts are within distance 2
        let d = overlap_diagnostic(&g, &[0, 2, 5, 19, 5], 1);
        // pairs: (0,2) yes, (2,5) no, (5,5) yes
        assert_eq!(d.pairs, 10);
        assert_eq!(d.overlapping_pairs, 2);
    }

    #[test]
    fn degree_biased_on_regular_graph_matches_uniform() {
        let g = gen_k_regular(3, 1000, 5).unwrap().graph;
        let a = estimate(&g, 10, 400, params(0.7), 6, EstimateOptions::default()).unwrap();
        let b = estimate_degree_biased(&g, 10, 400, params(0.7), 6, EstimateOptions::default()).unwrap();
        assert_eq!(b.acceptance_rate, Some(1.0));
        assert_eq!(a.queries, b.queries);
    }

    #[test]
    fn degree_biased_star() {
        let g = Graph::star(99);
        let opts = EstimateOptions::default();
        let uni = estimate(&g, 5, 4000, params(0.1), 1, opts).unwrap();
        let biased = estimate_degree_biased(&g, 5, 4000, params(0.1), 1, opts).unwrap();
        let centers = biased.queries.iter().filter(|r| r.vertex == 0).count() as f64 / 4000.0;
        assert!((centers - 0.5).abs() < 0.03, "{centers}");
        assert!(biased.n_tilde > uni.n_tilde);
        // accepted per proposed = mean degree / max degree
        let expected = (2.0 * 99.0 / 100.0) / 99.0;
        let rate = biased.acceptance_rate.unwrap();
        assert!((rate - expected).abs() < 0.003, "{rate} vs {expected}");
    }

    #[test]
    fn adaptive_full_transmission_stops_immediately() {
        let g = gen_k_regular(3, 300, 2).unwrap().graph;
        let r = adaptive_estimate(&g, 0.2, params(1.0), 1, EstimateOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.schedule.len(), 2);
        assert_eq!(r.report.n_tilde, 1.0);
        assert_eq!(r.report.q, 200);
    }

    #[test]
    fn adaptive_flags_tiny_graphs() {
        let g = Graph::path(10);
        let r = adaptive_estimate(&g, 0.01, params(0.5), 1, EstimateOptions::default()).unwrap();
        assert!(!r.converged || r.schedule.len() >= 2);
    }

    #[test]
    fn invalid_arguments() {
        let g = Graph::path(3);
        let opts = EstimateOptions::default();
        assert!(estimate(&g, 0, 10, params(0.5), 0, opts).is_err());
        assert!(estimate(&g, 1, 0, params(0.5), 0, opts).is_err());
        assert!(adaptive_estimate(&g, 0.0, params(0.5), 0, opts).is_err());
        assert!(estimate_degree_biased(&Graph::empty(3), 1, 1, params(0.5), 0, opts).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ball_containment(n in 5usize..50, extra in 0usize..60, seed_val in any::<u64>(), k in 1usize..10, p in 0.0f64..1.0) {
            // random connected-ish graph: a random tree plus extra edges
            let mut rng = seed::rng(seed_val);
            let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
            for _ in 0..extra {
                let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                if a != b { edges.push((a, b)); }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let v = rng.random_range(0..n);
            let stream = seed::substream(seed_val, 1);
            let full = crate::epidemic::run_sir(&g, &[v], params(p), stream).unwrap();
            let local = local_query(&g, v, k, params(p), stream, SuccessRule::SeedCounted).unwrap();
            if full.record.final_size >= k {
                prop_assert!(local.recovered >= k);
            }
            prop_assert!(local.recovered <= full.record.final_size);
            prop_assert_eq!(local.hit, full.record.final_size >= k);
        }
    }
}
