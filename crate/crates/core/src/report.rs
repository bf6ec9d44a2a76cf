//! Density report: solution counts per decade of height and per target.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::arith::{mod9_admissible, Solution};
use crate::oracle::decade;
use crate::parametric::classify;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub k_max: u64,
    pub total: u64,
    /// Decade d counts solutions with height in [10^d, 10^(d+1)).
    pub decade_counts: BTreeMap<u32, u64>,
    /// Decade counts without parametric family members and without the
    /// solutions (−n, n, m) with k = m³.
    pub sporadic_decade_counts: BTreeMap<u32, u64>,
    pub per_k: BTreeMap<u64, u64>,
    /// Admissible k ≤ k_max with no solution in the corpus.
    pub unsolved: Vec<u64>,
}

/// True for the solutions in which two coordinates cancel.
pub fn is_opposite_pair(s: &Solution) -> bool {
    let c = s.coords();
    (0..3).any(|i| (i + 1..3).any(|j| c[i] != 0 && c[i] == -c[j]))
}

pub fn is_sporadic(s: &Solution) -> bool {
    !is_opposite_pair(s) && classify(s).is_none()
}

/// Builds the report from a verified corpus; solutions with k above k_max
/// are ignored. Duplicates must already be removed.
pub fn density_report(corpus: &[Solution], k_max: u64) -> DensityReport {
    let mut decade_counts = BTreeMap::new();
    let mut sporadic_decade_counts = BTreeMap::new();
    let mut per_k = BTreeMap::new();
    let mut total = 0;
    for s in corpus {
        let Some(k) = s.k_u64().filter(|&k| (1..=k_max).contains(&k)) else {
            continue;
        };
        total += 1;
        let d = decade(s.height());
        *decade_counts.entry(d).or_insert(0) += 1;
        if is_sporadic(s) {
            *sporadic_decade_counts.entry(d).or_insert(0) += 1;
        }
        *per_k.entry(k).or_insert(0) += 1;
    }
    let unsolved = (1..=k_max)
        .filter(|&k| mod9_admissible(k) && !per_k.contains_key(&k))
        .collect();
    DensityReport {
        k_max,
        total,
        decade_counts,
        sporadic_decade_counts,
        per_k,
        unsolved,
    }
}

impl DensityReport {
    /// (10^(d+1), number of solutions with height below it), for each decade
    /// from 0 to the largest present.
    pub fn cumulative(&self) -> Vec<(u128, u64)> {
        let Some(&top) = self.decade_counts.keys().next_back() else {
            return Vec::new();
        };
        let mut acc = 0;
        (0..=top)
            .map(|d| {
                acc += self.decade_counts.get(&d).copied().unwrap_or(0);
                (10u128.pow(d + 1), acc)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# density report, k_max {}", self.k_max).unwrap();
        writeln!(s, "total {}", self.total).unwrap();
        writeln!(s, "# decade all sporadic cumulative").unwrap();
        for (bound, cum) in self.cumulative() {
            let d = bound.ilog10() - 1;
            writeln!(
                s,
                "decade {d} {} {} {cum}",
                self.decade_counts.get(&d).copied().unwrap_or(0),
                self.sporadic_decade_counts.get(&d).copied().unwrap_or(0)
            )
            .unwrap();
        }
        let list: Vec<String> = self.unsolved.iter().map(|k| k.to_string()).collect();
        writeln!(s, "unsolved {} [{}]", self.unsolved.len(), list.join(" ")).unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus() {
        let r = density_report(&[], 20);
        assert_eq!(r.total, 0);
        assert!(r.decade_counts.is_empty());
        assert_eq!(r.unsolved, vec![1, 2, 3, 6, 7, 8, 9, 10, 11, 12, 15, 16, 17, 18, 19, 20]);
        assert!(r.cumulative().is_empty());
    }

    #[test]
    fn classification() {
        assert!(is_opposite_pair(&Solution::new(-5, 2, 5, 8i64)));
        assert!(!is_opposite_pair(&Solution::new(1, 1, 1, 3i64)));
        assert!(!is_sporadic(&Solution::new(-8, -6, 9, 1i64)));
        assert!(is_sporadic(&Solution::new(1, 1, 2, 10i64)));
    }

    #[test]
    fn counts_and_cumulative() {
        let corpus = [
            Solution::new(1, 1, 1, 3i64),
            Solution::new(-8, -6, 9, 1i64),
            Solution::new(-2, -2, 3, 11i64),
            Solution::new(-11, -11, 14, 82i64),
        ];
        let r = density_report(&corpus, 20);
        assert_eq!(r.total, 3);
        assert_eq!(r.decade_counts, BTreeMap::from([(0, 3)]));
        assert_eq!(r.per_k[&3], 1);
        assert!(!r.unsolved.contains(&11));
        assert_eq!(r.cumulative(), vec![(10, 3)]);
        assert!(r.to_text().contains("decade 0 3 2 3"));
    }
}
