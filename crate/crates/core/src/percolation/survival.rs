//! Survival probability of the root cluster for configuration-model limits,
//! where the local limit is a two-stage branching process: the root has the
//! degree law `D`, every other vertex has the size-biased law minus one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_probability, trial_stream};
use crate::error::{Error, Result};
use crate::graph::{components_where, DegreeSequence, Graph};
use crate::seed;
use crate::stats::MeanEstimate;

pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITERATIONS: usize = 1_000_000;
/// Largest degree a tabulated law may carry.
pub const DEGREE_SUPPORT_CAP: usize = 1_000_000;

/// Finite degree distribution; `pmf[k] = P(D = k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeLaw {
    pmf: Vec<f64>,
    /// Probability mass cut off by truncation (0 for exact laws).
    pub truncated_mass: f64,
}

impl DegreeLaw {
    pub fn from_pmf(pmf: Vec<f64>) -> Result<DegreeLaw> {
        if pmf.len() > DEGREE_SUPPORT_CAP + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree support exceeds {DEGREE_SUPPORT_CAP}"
            )));
        }
        if pmf.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::InvalidParameter("negative or non-finite mass".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("masses sum to {total}")));
        }
        let law = DegreeLaw {
            pmf,
            truncated_mass: 0.0,
        };
        if law.mean() <= 0.0 {
            return Err(Error::InvalidParameter("degree law has mean 0".into()));
        }
        Ok(law)
    }

    /// `D = d` almost surely.
    pub fn constant(d: usize) -> Result<DegreeLaw> {
        let mut pmf = vec![0.0; d + 1];
        pmf[d] = 1.0;
        DegreeLaw::from_pmf(pmf)
    }

    /// Empirical law of a degree sequence.
    pub fn from_sequence(d: &DegreeSequence) -> Result<DegreeLaw> {
        DegreeLaw::from_pmf(d.empirical_pmf())
    }

    /// `P(D = k) ∝ k^-tau` on `k_min..=cap`, renormalized; `truncated_mass`
    /// estimates the share of the untruncated law above `cap`.
    pub fn power_law(tau: f64, k_min: usize, cap: usize) -> Result<DegreeLaw> {
        if tau <= 1.0 || k_min == 0 || cap < k_min || cap > DEGREE_SUPPORT_CAP {
            return Err(Error::InvalidParameter(
                "power law needs tau > 1 and 1 <= k_min <= cap <= 1e6".into(),
            ));
        }
        let mut pmf = vec![0.0; cap + 1];
        for (k, w) in pmf.iter_mut().enumerate().skip(k_min) {
            *w = (k as f64).powf(-tau);
        }
        let head: f64 = pmf.iter().sum();
        // midpoint-rule tail beyond the cap
        let tail = (cap as f64 + 0.5).powf(1.0 - tau) / (tau - 1.0);
        pmf.iter_mut().for_each(|w| *w /= head);
        Ok(DegreeLaw {
            pmf,
            truncated_mass: tail / (head + tail),
        })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// Mean of the size-biased-minus-one (forward) law.
    pub fn forward_mean(&self) -> f64 {
        let second: f64 = self
            .pmf
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64) * (k as f64 - 1.0) * p)
            .sum();
        second / self.mean()
    }

    /// Generating function `E[s^D]`.
    pub fn pgf(&self, s: f64) -> f64 {
        self.pmf.iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }

    /// Generating function of the forward law, `E[D s^(D-1)] / E[D]`.
    pub fn forward_pgf(&self, s: f64) -> f64 {
        let deriv = self
            .pmf
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &p)| acc * s + k as f64 * p);
        deriv / self.mean()
    }

    fn forward_is_one(&self) -> bool {
        // forward law is a point mass at 1 iff D = 2 almost surely
        self.pmf.get(2).is_some_and(|&p| p == 1.0)
    }
}

/// Result of the extinction fixed-point computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub p: f64,
    /// Survival probability of the root cluster.
    pub zeta: f64,
    /// Extinction probability along a forward edge.
    pub eta: f64,
    pub iterations: usize,
    /// Last step size; 0 when decided without iterating.
    pub gap: f64,
}

/// The percolated forward generating function `s ↦ g*(1 - p + p s)`.
fn forward_map(law: &DegreeLaw, p: f64, eta: f64) -> f64 {
    law.forward_pgf(1.0 - p + p * eta)
}

/// First `count` iterates of the extinction map started from 0.
pub fn extinction_iterates(law: &DegreeLaw, p: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    let mut eta = 0.0;
    out.push(eta);
    for _ in 0..count {
        eta = forward_map(law, p, eta);
        out.push(eta);
    }
    out
}

/// Survival probability `ζ(p) = 1 - g(1 - p + p η)` where `η` is the smallest
/// fixed point of `η = g*(1 - p + p η)`.
///
/// When the percolated forward mean `p E[D(D-1)]/E[D]` is at most 1 the
/// smallest fixed point is 1 and no iteration is needed; iterating from 0
/// there converges only like `1/t`. Otherwise iterates increase
/// monotonically from 0 to the smallest fixed point.
pub fn survival_fixed_point_cm(law: &DegreeLaw, p: f64) -> Result<FixedPoint> {
    check_probability(p)?;
    let offspring_mean = p * law.forward_mean();
    if offspring_mean <= 1.0 && !(p == 1.0 && law.forward_is_one()) {
        return Ok(FixedPoint {
            p,
            zeta: 0.0,
            eta: 1.0,
            iterations: 0,
            gap: 0.0,
        });
    }
    let mut eta = 0.0f64;
    for it in 1..=FIXED_POINT_MAX_ITERATIONS {
        let next = forward_map(law, p, eta);
        let gap = (next - eta).abs();
        eta = next;
        if gap < FIXED_POINT_TOLERANCE {
            let zeta = (1.0 - law.pgf(1.0 - p + p * eta)).clamp(0.0, 1.0);
            return Ok(FixedPoint {
                p,
                zeta,
                eta,
                iterations: it,
                gap,
            });
        }
    }
    let prev = eta;
    let next = forward_map(law, p, eta);
    Err(Error::NoConvergence {
        iterations: FIXED_POINT_MAX_ITERATIONS,
        gap: (next - prev).abs(),
        last: eta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    FixedPoint,
    MonteCarlo,
}

impl CurveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveMethod::FixedPoint => "fixed_point",
            CurveMethod::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub grid: Vec<f64>,
    pub zeta: Vec<f64>,
    /// 95% halfwidth for Monte Carlo; iteration tolerance for fixed points.
    pub error: Vec<f64>,
    pub method: CurveMethod,
}

impl SurvivalCurve {
    /// CSV with header `p,zeta,err,method`, rows in grid order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,zeta,err,method\n");
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.grid[i],
                self.zeta[i],
                self.error[i],
                self.method.as_str()
            ));
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    for &p in grid {
        check_probability(p)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("p grid must be strictly increasing".into()));
    }
    Ok(())
}

pub fn survival_curve_analytic(law: &DegreeLaw, grid: &[f64]) -> Result<SurvivalCurve> {
    check_grid(grid)?;
    let mut zeta = Vec::with_capacity(grid.len());
    let mut error = Vec::with_capacity(grid.len());
    for &p in grid {
        let fp = survival_fixed_point_cm(law, p)?;
        zeta.push(fp.zeta);
        error.push(if fp.iterations == 0 { 0.0 } else { FIXED_POINT_TOLERANCE });
    }
    Ok(SurvivalCurve {
        grid: grid.to_vec(),
        zeta,
        error,
        method: CurveMethod::FixedPoint,
    })
}

/// Mean `|C_1|/n` per grid point. Every trial uses one tape for the whole
/// grid, so each trial's curve is monotone.
pub fn survival_curve_empirical(
    g: &Graph,
    grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SurvivalCurve> {
    check_grid(grid)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let stream = trial_stream(seed, t);
            let tape: Vec<f64> = (0..g.m()).map(|e| seed::edge_uniform(stream, e)).collect();
            grid.iter()
                .map(|&p| components_where(g, |e| tape[e] < p).giant_fraction)
                .collect()
        })
        .collect();
    let mut zeta = Vec::with_capacity(grid.len());
    let mut error = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let est = MeanEstimate::from_samples(per_trial.iter().map(|row| row[i]));
        zeta.push(est.mean);
        error.push(est.halfwidth());
    }
    Ok(SurvivalCurve {
        grid: grid.to_vec(),
        zeta,
        error,
        method: CurveMethod::MonteCarlo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> DegreeLaw {
        DegreeLaw::constant(3).unwrap()
    }

    /// Smallest root in [0, 1] of `(1 - p + p η)^2 = η` (forward law of D ≡ 3).
    fn cubic_eta_closed_form(p: f64) -> f64 {
        // p²η² + (2p(1-p) - 1)η + (1-p)² = 0
        let a = p * p;
        let b = 2.0 * p * (1.0 - p) - 1.0;
        let c = (1.0 - p) * (1.0 - p);
        let disc = (b * b - 4.0 * a * c).max(0.0);
        ((-b - disc.sqrt()) / (2.0 * a)).min(1.0)
    }

    #[test]
    fn cubic_values() {
        let fp = survival_fixed_point_cm(&cubic(), 0.9).unwrap();
        assert!((fp.eta - 1.0 / 81.0).abs() < 1e-12);
        assert!((fp.zeta - (1.0 - (0.1f64 + 0.9 / 81.0).powi(3))).abs() < 1e-12);
        assert!((fp.zeta - 0.998628).abs() < 5e-7);

        let fp = survival_fixed_point_cm(&cubic(), 0.7).unwrap();
        assert!((fp.eta - cubic_eta_closed_form(0.7)).abs() < 1e-11);
        assert!((fp.eta - 0.183673).abs() < 5e-7);
        assert!((fp.zeta - (1.0 - 27.0 / 343.0)).abs() < 1e-11);

        let fp = survival_fixed_point_cm(&cubic(), 0.5).unwrap();
        assert_eq!((fp.zeta, fp.eta), (0.0, 1.0));
    }

    #[test]
    fn closed_form_agreement_across_p() {
        for i in 51..=100 {
            let p = i as f64 / 100.0;
            let eta = cubic_eta_closed_form(p);
            let fp = survival_fixed_point_cm(&cubic(), p).unwrap();
            assert!((fp.eta - eta).abs() < 1e-9, "p = {p}: {} vs {eta}", fp.eta);
            let zeta = 1.0 - (1.0 - p + p * eta).powi(3);
            assert!((fp.zeta - zeta).abs() < 1e-9);
        }
    }

    #[test]
    fn iterates_increase_to_the_fixed_point() {
        for p in [0.55, 0.7, 0.9, 1.0] {
            let eta = cubic_eta_closed_form(p);
            let its = extinction_iterates(&cubic(), p, 500);
            assert!(its.windows(2).all(|w| w[0] <= w[1]));
            assert!(its.iter().all(|&x| x <= eta + 1e-14));
        }
    }

    #[test]
    fn endpoints() {
        let law = cubic();
        assert_eq!(survival_fixed_point_cm(&law, 0.0).unwrap().zeta, 0.0);
        assert_eq!(survival_fixed_point_cm(&law, 1.0).unwrap().zeta, 1.0);
        // D ≡ 2 at p = 1 is a bi-infinite path: the root always survives
        let two = DegreeLaw::constant(2).unwrap();
        assert_eq!(survival_fixed_point_cm(&two, 1.0).unwrap().zeta, 1.0);
        assert_eq!(survival_fixed_point_cm(&two, 0.99).unwrap().zeta, 0.0);
        assert!(survival_fixed_point_cm(&law, -0.1).is_err());
    }

    #[test]
    fn mixed_law_against_bisection() {
        // P(D=1)=0.3, P(D=2)=0.3, P(D=4)=0.4
        let law = DegreeLaw::from_pmf(vec![0.0, 0.3, 0.3, 0.0, 0.4]).unwrap();
        let p = 0.8;
        let fp = survival_fixed_point_cm(&law, p).unwrap();
        // bisection for the smallest root of f(η) = g*(1-p+pη) - η on [0, 1)
        let f = |e: f64| law.forward_pgf(1.0 - p + p * e) - e;
        let (mut lo, mut hi) = (0.0, 0.999_999);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((fp.eta - lo).abs() < 1e-10);
    }

    #[test]
    fn analytic_curve() {
        let curve = survival_curve_analytic(&cubic(), &[0.0, 0.5, 0.7, 0.9, 1.0]).unwrap();
        let expected = [0.0, 0.0, 0.92129, 0.998628, 1.0];
        for (z, e) in curve.zeta.iter().zip(expected) {
            assert!((z - e).abs() < 1e-5, "{z} vs {e}");
        }
        assert!(curve.to_csv().starts_with("p,zeta,err,method\n0,0,0,fixed_point\n"));
        assert!(survival_curve_analytic(&cubic(), &[0.5, 0.4]).is_err());
    }

    #[test]
    fn power_law_truncation() {
        let law = DegreeLaw::power_law(2.5, 1, 1000).unwrap();
        assert!((law.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(law.truncated_mass > 0.0 && law.truncated_mass < 1e-3);
        assert!(law.forward_mean() > 1.0);
    }

    #[test]
    fn laws_validated() {
        assert!(DegreeLaw::from_pmf(vec![1.0]).is_err());
        assert!(DegreeLaw::from_pmf(vec![0.5, 0.6]).is_err());
        assert!(DegreeLaw::from_pmf(vec![-0.5, 1.5]).is_err());
    }
}
