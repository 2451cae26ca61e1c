//! SIR with a fixed recovery time. An infected vertex gets one chance to
//! infect each susceptible neighbor, succeeding with probability `p`, then
//! recovers. The final infected set is therefore the union of the seeds'
//! clusters under bond percolation with retention `p`, which is how every
//! routine here runs: by BFS over open edges of a per-edge uniform tape.

mod estimator;
mod histogram;

pub use estimator::{
    adaptive_estimate, estimate, estimate_degree_biased, AdaptiveReport, AdaptiveStage,
    EstimateOptions, EstimatorReport, OverlapDiagnostic, QueryRow, DEFAULT_OVERLAP_SAMPLE,
};
pub use histogram::{
    outbreak_histogram, BandMasses, HistogramOptions, OutbreakHistogram, TrialRow,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_ball, open_bfs_generations, Graph};
use crate::percolation::{check_probability, EdgeMask};
use crate::seed;

/// Per-edge transmission probability `λ / (λ + 1)` for contact rate `λ`.
pub fn lambda_to_p(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "rate must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(lambda / (lambda + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionParams {
    pub p: f64,
    pub lambda: Option<f64>,
}

impl TransmissionParams {
    pub fn from_p(p: f64) -> Result<TransmissionParams> {
        check_probability(p)?;
        Ok(TransmissionParams { p, lambda: None })
    }

    pub fn from_lambda(lambda: f64) -> Result<TransmissionParams> {
        Ok(TransmissionParams {
            p: lambda_to_p(lambda)?,
            lambda: Some(lambda),
        })
    }
}

/// When a local query counts as a hit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessRule {
    /// `|R| >= k` with the seed counted in `R`.
    #[default]
    SeedCounted,
    /// At least `k` vertices besides the seed, i.e. `|R| >= k + 1`.
    OthersCounted,
}

impl SuccessRule {
    /// Minimum `|R|` for a hit.
    pub fn threshold(self, k: usize) -> usize {
        match self {
            SuccessRule::SeedCounted => k,
            SuccessRule::OthersCounted => k + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutbreakRecord {
    pub seeds: Vec<usize>,
    /// Ever-infected count, seeds included.
    pub final_size: usize,
    pub relative_size: f64,
    pub reached_k: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SirRun {
    pub record: OutbreakRecord,
    /// Ever-infected vertices, sorted.
    pub infected: Vec<usize>,
    /// Vertices infected per generation; generation 0 are the seeds.
    pub generations: Vec<Vec<usize>>,
}

fn normalize_seeds(g: &Graph, seeds: &[usize]) -> Result<Vec<usize>> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    for &s in seeds {
        g.check_vertex(s)?;
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    Ok(seeds)
}

fn finish(g: &Graph, seeds: Vec<usize>, generations: Vec<Vec<usize>>) -> SirRun {
    let mut infected: Vec<usize> = generations.iter().flatten().copied().collect();
    infected.sort_unstable();
    let final_size = infected.len();
    SirRun {
        record: OutbreakRecord {
            seeds,
            final_size,
            relative_size: final_size as f64 / g.n() as f64,
            reached_k: None,
        },
        infected,
        generations,
    }
}

/// Outbreak on a given realization of the transmission indicators.
pub fn run_sir_with_mask(g: &Graph, seeds: &[usize], mask: &EdgeMask) -> Result<SirRun> {
    mask.check(g)?;
    let seeds = normalize_seeds(g, seeds)?;
    let generations = open_bfs_generations(g, &seeds, |e| mask.bits[e]);
    Ok(finish(g, seeds, generations))
}

/// Outbreak with transmission indicators drawn from the tape `stream`.
pub fn run_sir(g: &Graph, seeds: &[usize], params: TransmissionParams, stream: u64) -> Result<SirRun> {
    check_probability(params.p)?;
    let seeds = normalize_seeds(g, seeds)?;
    let p = params.p;
    let generations = open_bfs_generations(g, &seeds, |e| seed::edge_uniform(stream, e) < p);
    Ok(finish(g, seeds, generations))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub hit: bool,
    /// `|R|` when the local process stops.
    pub recovered: usize,
    pub ball_size: usize,
}

/// One query of the local algorithm, run literally: find the ball `B_k(v)`,
/// run SIR from `v` inside the induced subgraph, test `|R|` against `k`.
pub fn local_query(
    g: &Graph,
    v: usize,
    k: usize,
    params: TransmissionParams,
    stream: u64,
    rule: SuccessRule,
) -> Result<QueryResult> {
    check_probability(params.p)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let ball = bfs_ball(g, v, k)?;
    let mut susceptible = vec![false; g.n()];
    for &(u, _) in &ball {
        susceptible[u] = true;
    }
    susceptible[v] = false;
    let mut infected = std::collections::VecDeque::from([v]);
    let mut recovered = 0usize;
    while let Some(u) = infected.pop_front() {
        for (w, e) in g.incident(u) {
            if susceptible[w] && seed::edge_uniform(stream, e) < params.p {
                susceptible[w] = false;
                infected.push_back(w);
            }
        }
        recovered += 1;
    }
    Ok(QueryResult {
        hit: recovered >= rule.threshold(k),
        recovered,
        ball_size: ball.len(),
    })
}

/// Reusable marks for [`probe`], so queries cost O(explored) rather than O(n).
pub(crate) struct ProbeScratch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
}

impl ProbeScratch {
    pub(crate) fn new(n: usize) -> ProbeScratch {
        ProbeScratch {
            stamp: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// Same answer as [`local_query`] without building the ball: explore the
/// open cluster of `v` and stop as soon as it holds `threshold` vertices.
///
/// A connected set of `t` vertices containing `v` lies within distance
/// `t - 1` of `v`, so until the count reaches `k + 1` every vertex the
/// exploration touches is inside `B_k(v)`, and a cluster smaller than the
/// threshold is the same inside and outside the ball. Returns `|R|` capped at
/// `threshold`.
pub(crate) fn probe(
    g: &Graph,
    v: usize,
    threshold: usize,
    p: f64,
    stream: u64,
    s: &mut ProbeScratch,
) -> usize {
    debug_assert!(threshold >= 1);
    let epoch = s.next_epoch();
    s.queue.clear();
    s.queue.push(v as u32);
    s.stamp[v] = epoch;
    let mut head = 0;
    while head < s.queue.len() {
        if s.queue.len() >= threshold {
            return threshold;
        }
        let u = s.queue[head] as usize;
        head += 1;
        for (w, e) in g.incident(u) {
            if s.stamp[w] != epoch && seed::edge_uniform(stream, e) < p {
                s.stamp[w] = epoch;
                s.queue.push(w as u32);
            }
        }
    }
    s.queue.len().min(threshold)
}
