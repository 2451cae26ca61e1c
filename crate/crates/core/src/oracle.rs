//! Exact percolation laws on tiny graphs by enumerating all `2^m` masks.
//!
//! Enumeration records, for each outcome, how many masks with `j` open edges
//! produce it. The law at any `p` is then `Σ_j count_j p^j (1-p)^(m-j)`,
//! evaluated either in floating point with compensated summation or exactly
//! over the rationals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, UnionFind};
use crate::percolation::check_probability;

/// Largest edge count accepted for enumeration.
pub const ENUMERATION_CAP: usize = 24;

/// `counts[outcome][j]`: masks with `j` open edges yielding `outcome`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCountTable {
    m: usize,
    counts: Vec<Vec<u64>>,
}

/// Law with floating-point probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactLaw {
    pub support: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl ExactLaw {
    pub fn probability_of(&self, value: usize) -> f64 {
        self.support
            .iter()
            .position(|&s| s == value)
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(&s, &p)| s as f64 * p)
            .sum()
    }

    /// `{"value": probability}` map, the CLI's JSON form.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.support
            .iter()
            .zip(&self.probabilities)
            .map(|(s, p)| (s.to_string(), *p))
            .collect()
    }

    /// Total variation distance to an empirical law given as value counts.
    pub fn total_variation(&self, counts: &BTreeMap<usize, usize>) -> f64 {
        let total: usize = counts.values().sum();
        let mut keys: Vec<usize> = self.support.clone();
        keys.extend(counts.keys().copied());
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|&k| {
                let emp = counts.get(&k).copied().unwrap_or(0) as f64 / total as f64;
                (self.probability_of(k) - emp).abs()
            })
            .sum::<f64>()
    }
}

/// Law with exact rational probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLaw {
    pub support: Vec<usize>,
    pub probabilities: Vec<BigRational>,
}

impl RationalLaw {
    pub fn probability_of(&self, value: usize) -> BigRational {
        self.support
            .iter()
            .position(|&s| s == value)
            .map_or_else(BigRational::zero, |i| self.probabilities[i].clone())
    }

    pub fn total(&self) -> BigRational {
        self.probabilities.iter().fold(BigRational::zero(), |acc, x| acc + x)
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl EdgeCountTable {
    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn outcomes(&self) -> usize {
        self.counts.len()
    }

    /// Total mask count per outcome.
    pub fn mask_counts(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn probability(&self, outcome: usize, p: f64) -> f64 {
        let m = self.m as i32;
        compensated_sum(
            self.counts[outcome]
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(j, &c)| c as f64 * p.powi(j as i32) * (1.0 - p).powi(m - j as i32)),
        )
    }

    /// `d/dp` of [`EdgeCountTable::probability`].
    pub fn derivative(&self, outcome: usize, p: f64) -> f64 {
        let m = self.m as i32;
        compensated_sum(self.counts[outcome].iter().enumerate().filter(|(_, &c)| c > 0).map(
            |(j, &c)| {
                let j = j as i32;
                let up = if j > 0 {
                    j as f64 * p.powi(j - 1) * (1.0 - p).powi(m - j)
                } else {
                    0.0
                };
                let down = if m - j > 0 {
                    (m - j) as f64 * p.powi(j) * (1.0 - p).powi(m - j - 1)
                } else {
                    0.0
                };
                c as f64 * (up - down)
            },
        ))
    }

    pub fn probability_rational(&self, outcome: usize, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        let mut total = BigRational::zero();
        for (j, &c) in self.counts[outcome].iter().enumerate() {
            if c > 0 {
                let term = pow(p, j) * pow(&q, self.m - j) * BigRational::from_integer(BigInt::from(c));
                total += term;
            }
        }
        total
    }

    pub fn law(&self, p: f64) -> Result<ExactLaw> {
        check_probability(p)?;
        let mut support = Vec::new();
        let mut probabilities = Vec::new();
        for outcome in 0..self.counts.len() {
            let prob = self.probability(outcome, p);
            if prob != 0.0 {
                support.push(outcome);
                probabilities.push(prob);
            }
        }
        Ok(ExactLaw {
            support,
            probabilities,
        })
    }

    pub fn law_rational(&self, p: &BigRational) -> Result<RationalLaw> {
        if p < &BigRational::zero() || p > &BigRational::one() {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        let mut support = Vec::new();
        let mut probabilities = Vec::new();
        for outcome in 0..self.counts.len() {
            let prob = self.probability_rational(outcome, p);
            if !prob.is_zero() {
                support.push(outcome);
                probabilities.push(prob);
            }
        }
        Ok(RationalLaw {
            support,
            probabilities,
        })
    }
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Enumerates every mask and tallies `outcome(mask)` by open-edge count.
fn enumerate(
    g: &Graph,
    outcomes: usize,
    outcome: impl Fn(u32, &mut UnionFind) -> usize + Sync,
) -> Result<EdgeCountTable> {
    let m = g.m();
    if m > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            m,
            cap: ENUMERATION_CAP,
        });
    }
    let total: u64 = 1 << m;
    let chunk = (total / 256).max(1);
    let chunks = total.div_ceil(chunk);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = vec![vec![0u64; m + 1]; outcomes];
            let mut uf = UnionFind::new(g.n());
            for mask in c * chunk..((c + 1) * chunk).min(total) {
                let mask = mask as u32;
                let key = outcome(mask, &mut uf);
                local[key][mask.count_ones() as usize] += 1;
            }
            local
        })
        .reduce(
            || vec![vec![0u64; m + 1]; outcomes],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );
    Ok(EdgeCountTable { m, counts })
}

fn union_open(g: &Graph, mask: u32, uf: &mut UnionFind) {
    *uf = UnionFind::new(g.n());
    for (e, (u, v)) in g.edges().enumerate() {
        if mask >> e & 1 == 1 {
            uf.union(u, v);
        }
    }
}

/// Table of `|C(v)|`.
pub fn component_size_table(g: &Graph, v: usize) -> Result<EdgeCountTable> {
    g.check_vertex(v)?;
    enumerate(g, g.n() + 1, |mask, uf| {
        union_open(g, mask, uf);
        uf.size_of(v)
    })
}

/// Table of `|∪ C(s)|` over the seeds.
pub fn outbreak_size_table(g: &Graph, seeds: &[usize]) -> Result<EdgeCountTable> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    for &s in seeds {
        g.check_vertex(s)?;
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    enumerate(g, g.n() + 1, |mask, uf| {
        union_open(g, mask, uf);
        let mut roots: Vec<usize> = seeds.iter().map(|&s| uf.find(s)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.iter().map(|&r| uf.size_of(r)).sum()
    })
}

/// Outcome 1 when `C(v)` contains a vertex at graph distance `>= k` from `v`.
pub fn reach_table(g: &Graph, v: usize, k: usize) -> Result<EdgeCountTable> {
    g.check_vertex(v)?;
    let dist = bfs_distances(g, v);
    let far: Vec<usize> = (0..g.n()).filter(|&u| dist[u] != usize::MAX && dist[u] >= k).collect();
    enumerate(g, 2, |mask, uf| {
        union_open(g, mask, uf);
        let root = uf.find(v);
        usize::from(far.iter().any(|&u| uf.find(u) == root))
    })
}

/// Law of `|C(v)|` under bond percolation with retention `p`.
pub fn exact_component_distribution(g: &Graph, v: usize, p: f64) -> Result<ExactLaw> {
    check_probability(p)?;
    component_size_table(g, v)?.law(p)
}

/// Law of the total size of the seeds' clusters.
pub fn exact_outbreak_distribution(g: &Graph, seeds: &[usize], p: f64) -> Result<ExactLaw> {
    check_probability(p)?;
    outbreak_size_table(g, seeds)?.law(p)
}

/// `ζ̃_k(p)`: probability that `C(v)` reaches graph distance `k`.
pub fn exact_zeta_k(g: &Graph, v: usize, k: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(reach_table(g, v, k)?.probability(1, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn triangle_component_law() {
        let law = exact_component_distribution(&Graph::complete(3), 0, 0.5).unwrap();
        assert_eq!(law.support, vec![1, 2, 3]);
        assert_eq!(law.probabilities, vec![0.25, 0.25, 0.5]);
        let exact = component_size_table(&Graph::complete(3), 0)
            .unwrap()
            .law_rational(&half())
            .unwrap();
        assert_eq!(exact.probabilities, vec![rat(1, 4), rat(1, 4), rat(1, 2)]);
    }

    #[test]
    fn path_middle_law() {
        let law = exact_component_distribution(&Graph::path(3), 1, 0.5).unwrap();
        assert_eq!(law.probabilities, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn full_retention_is_point_mass() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        let law = exact_component_distribution(&g, 0, 1.0).unwrap();
        assert_eq!((law.support.clone(), law.probabilities.clone()), (vec![3], vec![1.0]));
    }

    #[test]
    fn triangle_two_seeds() {
        // vertex 2 stays out iff both edges at it are closed: probability 1/4
        let table = outbreak_size_table(&Graph::complete(3), &[0, 1]).unwrap();
        let law = table.law_rational(&half()).unwrap();
        assert_eq!(law.support, vec![2, 3]);
        assert_eq!(law.probabilities, vec![rat(1, 4), rat(3, 4)]);
    }

    #[test]
    fn outbreak_of_all_vertices() {
        let g = Graph::cycle(5);
        let law = exact_outbreak_distribution(&g, &[0, 1, 2, 3, 4], 0.3).unwrap();
        assert_eq!(law.support, vec![5]);
        assert!((law.probabilities[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_seed_outbreak_equals_component_law() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 1)]).unwrap();
        for v in 0..5 {
            assert_eq!(
                outbreak_size_table(&g, &[v]).unwrap(),
                component_size_table(&g, v).unwrap()
            );
        }
    }

    #[test]
    fn zeta_k_small_cases() {
        for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!((exact_zeta_k(&Graph::path(2), 0, 1, p).unwrap() - p).abs() < 1e-15);
            assert!((exact_zeta_k(&Graph::path(3), 0, 2, p).unwrap() - p * p).abs() < 1e-15);
            let table = reach_table(&Graph::path(3), 0, 2).unwrap();
            assert!((table.derivative(1, p) - 2.0 * p).abs() < 1e-12);
        }
    }

    #[test]
    fn rational_mode_sums_to_one() {
        let g = Graph::complete(5);
        let table = component_size_table(&g, 0).unwrap();
        for p in [rat(1, 3), rat(2, 7), rat(0, 1), rat(1, 1)] {
            assert_eq!(table.law_rational(&p).unwrap().total(), BigRational::one());
        }
        let law = table.law(0.37).unwrap();
        assert!((law.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_relabeling() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (1, 5)]).unwrap();
        let perm = [4, 0, 5, 2, 1, 3];
        let h = g.relabel(&perm).unwrap();
        for v in 0..6 {
            assert_eq!(
                component_size_table(&g, v).unwrap().mask_counts(),
                component_size_table(&h, perm[v]).unwrap().mask_counts()
            );
            assert_eq!(
                reach_table(&g, v, 2).unwrap().mask_counts(),
                reach_table(&h, perm[v], 2).unwrap().mask_counts()
            );
        }
    }

    #[test]
    fn cap_enforced() {
        let g = Graph::complete(8);
        assert!(matches!(
            component_size_table(&g, 0),
            Err(Error::EnumerationCap { m: 28, .. })
        ));
        assert!(outbreak_size_table(&Graph::path(3), &[]).is_err());
    }

    #[test]
    fn total_variation_against_counts() {
        let law = exact_component_distribution(&Graph::complete(3), 0, 0.5).unwrap();
        let counts = BTreeMap::from([(1, 25), (2, 25), (3, 50)]);
        assert_eq!(law.total_variation(&counts), 0.0);
        let skewed = BTreeMap::from([(1, 50), (3, 50)]);
        assert!((law.total_variation(&skewed) - 0.25).abs() < 1e-15);
    }
}
