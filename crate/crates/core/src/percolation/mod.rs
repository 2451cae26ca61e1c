//! Bond percolation on a fixed graph.
//!
//! Masks are thresholded per-edge uniform tapes (see [`crate::seed`]): edge
//! `e` is open at retention probability `p` iff its uniform is below `p`. One
//! tape therefore serves every `p`, and masks are nested in `p`.

mod bridges;
mod survival;

pub use bridges::{pivotal_bridge_report, BridgeReport, DEFAULT_FD_STEP};
pub use survival::{
    extinction_iterates, survival_curve_analytic, survival_curve_empirical,
    survival_fixed_point_cm, CurveMethod, DegreeLaw, FixedPoint, SurvivalCurve,
    FIXED_POINT_MAX_ITERATIONS, FIXED_POINT_TOLERANCE,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{components, components_where, ComponentStats, Graph};
use crate::seed;
use crate::stats::MeanEstimate;

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")))
    }
}

/// One percolation realization: a bit per canonical edge id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeMask {
    pub bits: Vec<bool>,
    pub p: f64,
    pub seed: u64,
    pub trial_index: u64,
}

impl EdgeMask {
    /// Mask from explicit bits, e.g. for exhaustive enumeration.
    pub fn from_bits(bits: Vec<bool>) -> EdgeMask {
        EdgeMask {
            bits,
            p: f64::NAN,
            seed: 0,
            trial_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_open(&self, edge: usize) -> bool {
        self.bits[edge]
    }

    pub fn open_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.bits.len() == g.m() {
            Ok(())
        } else {
            Err(Error::MaskLength {
                expected: g.m(),
                got: self.bits.len(),
            })
        }
    }

    pub fn components(&self, g: &Graph) -> Result<ComponentStats> {
        components(g, Some(&self.bits))
    }
}

/// Tape stream of trial `trial_index` under `seed`.
pub fn trial_stream(seed: u64, trial_index: u64) -> u64 {
    seed::substream(seed, trial_index)
}

/// Keeps each edge independently with probability `p`.
pub fn percolate(g: &Graph, p: f64, seed: u64, trial_index: u64) -> Result<EdgeMask> {
    check_probability(p)?;
    let stream = trial_stream(seed, trial_index);
    let bits = (0..g.m()).map(|e| seed::edge_uniform(stream, e) < p).collect();
    Ok(EdgeMask {
        bits,
        p,
        seed,
        trial_index,
    })
}

/// Per-trial largest-component fractions and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiantSummary {
    pub p: f64,
    pub seed: u64,
    pub fractions: Vec<f64>,
    pub estimate: MeanEstimate,
}

impl GiantSummary {
    pub fn mean(&self) -> f64 {
        self.estimate.mean
    }

    /// CSV with columns `trial,giant_fraction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,giant_fraction\n");
        for (t, f) in self.fractions.iter().enumerate() {
            out.push_str(&format!("{t},{f}\n"));
        }
        out
    }
}

/// `|C_1| / n` over `trials` independent masks.
pub fn giant_fraction(g: &Graph, p: f64, trials: usize, seed: u64) -> Result<GiantSummary> {
    check_probability(p)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let fractions: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let stream = trial_stream(seed, t);
            components_where(g, |e| seed::edge_uniform(stream, e) < p).giant_fraction
        })
        .collect();
    let estimate = MeanEstimate::from_samples(fractions.iter().copied());
    Ok(GiantSummary {
        p,
        seed,
        fractions,
        estimate,
    })
}

/// For each `k`, the probability that a uniform vertex lies in a component of
/// size at least `k` other than the largest one.
pub fn finite_cluster_tail(
    g: &Graph,
    p: f64,
    ks: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_probability(p)?;
    if trials == 0 || g.n() == 0 {
        return Err(Error::InvalidParameter("need trials >= 1 and n >= 1".into()));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let stream = trial_stream(seed, t);
            let c = components_where(g, |e| seed::edge_uniform(stream, e) < p);
            ks.iter()
                .map(|&k| {
                    // every non-giant component counts all of its vertices
                    let mass: usize = c.sizes.iter().skip(1).filter(|&&s| s >= k).sum();
                    mass as f64 / g.n() as f64
                })
                .collect()
        })
        .collect();
    Ok((0..ks.len())
        .map(|i| per_trial.iter().map(|row| row[i]).sum::<f64>() / trials as f64)
        .collect())
}
