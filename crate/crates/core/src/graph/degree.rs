use serde::{Deserialize, Serialize};

/// Prescribed degrees `d_0 .. d_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeSequence {
    pub degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> DegreeSequence {
        DegreeSequence { degrees }
    }

    /// `n` copies of `d`.
    pub fn regular(d: usize, n: usize) -> DegreeSequence {
        DegreeSequence::new(vec![d; n])
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn sum(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn is_graphical(&self) -> bool {
        check_graphical(self)
    }

    pub fn mean(&self) -> f64 {
        if self.degrees.is_empty() {
            0.0
        } else {
            self.sum() as f64 / self.len() as f64
        }
    }

    /// Empirical degree distribution: entry `k` is the fraction of vertices of degree `k`.
    pub fn empirical_pmf(&self) -> Vec<f64> {
        let max = self.degrees.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0usize; max + 1];
        for &d in &self.degrees {
            counts[d] += 1;
        }
        let n = self.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

/// Erdős–Gallai test: even sum and, for the degrees sorted descending,
/// `sum_{i<=k} d_i <= k(k-1) + sum_{i>k} min(d_i, k)` for every `k`.
pub fn check_graphical(d: &DegreeSequence) -> bool {
    if d.sum() % 2 == 1 {
        return false;
    }
    let n = d.len();
    let mut sorted = d.degrees.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    if sorted.first().is_some_and(|&top| top >= n) {
        return false;
    }
    // Indices with d_i >= k form a prefix of length `at_least[k]`, so the
    // tail sum splits into `k` per index in that prefix plus a suffix sum.
    let mut suffix = vec![0usize; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + sorted[i];
    }
    let mut at_least = vec![0usize; n + 2];
    for &x in &sorted {
        at_least[x.min(n + 1)] += 1;
    }
    for k in (0..=n).rev() {
        at_least[k] += at_least[k + 1];
    }
    let mut prefix = 0usize;
    for k in 1..=n {
        prefix += sorted[k - 1];
        let big = at_least[k].max(k);
        let tail = k * (big - k) + suffix[big];
        if prefix > k * (k - 1) + tail {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!(check_graphical(&DegreeSequence::new(vec![3, 3, 3, 3])));
        assert!(!check_graphical(&DegreeSequence::new(vec![3, 1])));
        assert!(check_graphical(&DegreeSequence::new(vec![0, 0])));
        assert!(!check_graphical(&DegreeSequence::new(vec![1, 1, 1])));
        assert!(check_graphical(&DegreeSequence::new(vec![])));
        assert!(!check_graphical(&DegreeSequence::new(vec![2, 2, 0])));
    }

    fn realizable_brute_force(degrees: &[usize]) -> bool {
        let n = degrees.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        (0u32..1 << pairs.len()).any(|mask| {
            let mut deg = vec![0; n];
            for (i, &(u, v)) in pairs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    deg[u] += 1;
                    deg[v] += 1;
                }
            }
            deg == degrees
        })
    }

    proptest! {
        #[test]
        fn erdos_gallai_matches_enumeration(degrees in proptest::collection::vec(0usize..6, 0..6)) {
            let seq = DegreeSequence::new(degrees.clone());
            prop_assert_eq!(check_graphical(&seq), realizable_brute_force(&degrees));
        }
    }
}
