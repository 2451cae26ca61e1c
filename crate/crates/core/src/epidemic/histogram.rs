//! Outbreak sizes from single uniformly random seeds.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_sir, TransmissionParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::percolation::check_probability;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramOptions {
    /// Band half-width around the atoms at 0 and the reference size.
    pub delta: f64,
    /// Reference outbreak size. When absent it is estimated as the fraction
    /// of trials reaching relative size `delta`: under a two-atom law the
    /// outbreak probability and the outbreak size coincide.
    pub zeta_ref: Option<f64>,
    pub bins: usize,
}

impl Default for HistogramOptions {
    fn default() -> Self {
        HistogramOptions {
            delta: 0.05,
            zeta_ref: None,
            bins: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: usize,
    pub final_size: usize,
    pub relative_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMasses {
    /// `[0, δ)`
    pub low: f64,
    /// `[δ, ζ̂ - δ)`
    pub middle: f64,
    /// `[ζ̂ - δ, 1]`
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutbreakHistogram {
    pub n: usize,
    pub p: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub delta: f64,
    pub zeta_ref: f64,
    pub zeta_ref_estimated: bool,
    pub bands: BandMasses,
    /// Counts over `bins` equal-width bins of `[0, 1]`; the last bin is closed.
    pub bin_counts: Vec<usize>,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl OutbreakHistogram {
    /// Fraction of trials with relative size in `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let hits = self
            .rows
            .iter()
            .filter(|r| r.relative_size >= lo && r.relative_size <= hi)
            .count();
        hits as f64 / self.trials as f64
    }

    /// CSV with columns `trial,seed,final_size,relative_size`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,final_size,relative_size\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.trial, r.seed, r.final_size, r.relative_size));
        }
        out
    }
}

/// Runs `trials` outbreaks, each from one uniformly random seed vertex.
///
/// Trial `t` uses `s = substream(master_seed, t)`: the seed vertex comes
/// from `rng(substream(s, 1))` and the tape is `substream(s, 0)`.
pub fn outbreak_histogram(
    g: &Graph,
    trials: usize,
    params: TransmissionParams,
    master_seed: u64,
    options: HistogramOptions,
) -> Result<OutbreakHistogram> {
    check_probability(params.p)?;
    if trials == 0 || g.n() == 0 {
        return Err(Error::InvalidParameter("need trials >= 1 and a nonempty graph".into()));
    }
    if !(options.delta > 0.0 && options.delta < 0.5) || options.bins == 0 {
        return Err(Error::InvalidParameter("need 0 < delta < 1/2 and bins >= 1".into()));
    }
    if let Some(z) = options.zeta_ref {
        check_probability(z)?;
    }
    let n = g.n();
    let rows: Vec<TrialRow> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed::substream(master_seed, t as u64);
            let start = seed::rng(seed::substream(s, 1)).random_range(0..n);
            let run = run_sir(g, &[start], params, seed::substream(s, 0)).expect("valid seed");
            TrialRow {
                trial: t,
                seed: start,
                final_size: run.record.final_size,
                relative_size: run.record.relative_size,
            }
        })
        .collect();
    let delta = options.delta;
    let frac = |pred: &dyn Fn(f64) -> bool| {
        rows.iter().filter(|r| pred(r.relative_size)).count() as f64 / trials as f64
    };
    let (zeta_ref, zeta_ref_estimated) = match options.zeta_ref {
        Some(z) => (z, false),
        None => (frac(&|x| x >= delta), true),
    };
    let upper = zeta_ref - delta;
    let bands = BandMasses {
        low: frac(&|x| x < delta),
        middle: frac(&|x| x >= delta && x < upper),
        high: frac(&|x| x >= upper.max(delta)),
    };
    let mut bin_counts = vec![0usize; options.bins];
    for r in &rows {
        let b = ((r.relative_size * options.bins as f64) as usize).min(options.bins - 1);
        bin_counts[b] += 1;
    }
    Ok(OutbreakHistogram {
        n,
        p: params.p,
        trials,
        master_seed,
        delta,
        zeta_ref,
        zeta_ref_estimated,
        bands,
        bin_counts,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_k_regular;

    #[test]
    fn no_transmission_puts_all_mass_at_one_vertex() {
        let g = gen_k_regular(3, 200, 1).unwrap().graph;
        let h = outbreak_histogram(&g, 100, TransmissionParams::from_p(0.0).unwrap(), 2, HistogramOptions::default())
            .unwrap();
        assert!(h.rows.iter().all(|r| r.final_size == 1));
        assert_eq!(h.bands.low, 1.0);
        assert_eq!(h.bin_counts[0], 100);
        assert!(h.to_csv().starts_with("trial,seed,final_size,relative_size\n0,"));
    }

    #[test]
    fn bands_partition_trials() {
        let g = gen_k_regular(3, 2000, 1).unwrap().graph;
        let h = outbreak_histogram(
            &g,
            300,
            TransmissionParams::from_p(0.7).unwrap(),
            5,
            HistogramOptions {
                zeta_ref: Some(0.92129),
                ..HistogramOptions::default()
            },
        )
        .unwrap();
        let total = h.bands.low + h.bands.middle + h.bands.high;
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(h.bin_counts.iter().sum::<usize>(), 300);
        assert!(h.bands.middle < 0.05);
    }

    #[test]
    fn rejects_bad_options() {
        let g = Graph::path(4);
        let p = TransmissionParams::from_p(0.5).unwrap();
        let bad = HistogramOptions { delta: 0.0, ..HistogramOptions::default() };
        assert!(outbreak_histogram(&g, 10, p, 0, bad).is_err());
        assert!(outbreak_histogram(&g, 0, p, 0, HistogramOptions::default()).is_err());
    }
}
