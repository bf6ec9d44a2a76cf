//! Brute-force solver for small bounds.
//!
//! Shares nothing with the lattice engine except exact arithmetic. For each
//! x it walks y upward while a pointer on z walks downward, so the whole
//! search is O(B²) with no cube roots inside the loop.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::arith::{icbrt_floor, mod9_admissible, verify_solution, Solution};

pub const MAX_ORACLE_BOUND: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle bound {0} outside [1, {MAX_ORACLE_BOUND}]")]
    BoundOutOfRange(u64),
    #[error("k_max must be positive")]
    ZeroKMax,
    #[error("configuration mismatch: {0}")]
    Mismatch(String),
}

/// Decade of a positive height: d with 10^d ≤ h < 10^(d+1).
pub fn decade(height: u64) -> u32 {
    height.max(1).ilog10()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub bound: u64,
    pub k_max: u64,
    /// Canonical and sorted.
    pub solutions: Vec<Solution>,
    pub decade_counts: BTreeMap<u32, u64>,
}

impl OracleResult {
    fn new(bound: u64, k_max: u64, mut solutions: Vec<Solution>) -> Self {
        solutions.sort();
        solutions.dedup();
        let mut decade_counts = BTreeMap::new();
        for s in &solutions {
            *decade_counts.entry(decade(s.height())).or_insert(0) += 1;
        }
        OracleResult {
            bound,
            k_max,
            solutions,
            decade_counts,
        }
    }

    /// Members with height in `range`, optionally only those with coordinates
    /// of both signs.
    pub fn restricted(&self, range: RangeInclusive<u64>, mixed_only: bool) -> Vec<Solution> {
        self.solutions
            .iter()
            .filter(|s| range.contains(&s.height()))
            .filter(|s| !mixed_only || is_mixed_sign(s))
            .cloned()
            .collect()
    }

    /// The standard solution text followed by a decade summary block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.solutions {
            out.push_str(&format!("{s}\n"));
        }
        out.push_str(&format!("# oracle bound {} k_max {}\n", self.bound, self.k_max));
        for (d, n) in &self.decade_counts {
            out.push_str(&format!("# decade {d} {n}\n"));
        }
        out
    }
}

pub fn is_mixed_sign(s: &Solution) -> bool {
    let c = s.coords();
    c.iter().any(|&v| v > 0) && c.iter().any(|&v| v < 0)
}

fn scan_x(x: i64, bound: i64, k_max: i128) -> Vec<Solution> {
    let mut out = Vec::new();
    let x3 = (x as i128).pow(3);
    let mut y = x;
    // largest z with x³ + y³ + z³ ≤ k_max, for the current y
    let mut z = icbrt_floor(k_max - x3 - 2 * (y as i128).pow(3)) as i64 + 1;
    while y <= bound {
        let y3 = (y as i128).pow(3);
        let limit = k_max - x3 - y3;
        while (z as i128).pow(3) > limit {
            z -= 1;
        }
        if z < y {
            break;
        }
        let mut zz = z.min(bound);
        while zz >= y {
            let k = x3 + y3 + (zz as i128).pow(3);
            if k < 1 {
                break;
            }
            if mod9_admissible(k) {
                out.push(Solution::new(x, y, zz, k));
            }
            zz -= 1;
        }
        y += 1;
    }
    out
}

/// All canonical solutions with max |coordinate| ≤ B and 1 ≤ k ≤ k_max.
pub fn brute_force(bound: u64, k_max: u64) -> Result<OracleResult, OracleError> {
    if bound == 0 || bound > MAX_ORACLE_BOUND {
        return Err(OracleError::BoundOutOfRange(bound));
    }
    if k_max == 0 {
        return Err(OracleError::ZeroKMax);
    }
    let b = bound as i64;
    let sols: Vec<Solution> = (-b..=b)
        .into_par_iter()
        .flat_map_iter(|x| scan_x(x, b, k_max as i128))
        .collect();
    debug_assert!(sols.iter().all(verify_solution));
    Ok(OracleResult::new(bound, k_max, sols))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrossCheckReport {
    /// In the oracle but not the engine output, with the locator's note.
    pub missing: Vec<(Solution, Option<String>)>,
    /// In the engine output but not the oracle.
    pub extra: Vec<Solution>,
    /// Engine members that fail exact verification; never expected.
    pub unverified: Vec<Solution>,
}

impl CrossCheckReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.unverified.is_empty()
    }
}

/// Compares engine output with the oracle's members whose height lies in
/// `range` (and, if `mixed_only`, that have both signs). `locate` names the
/// work unit that should have produced a missing solution.
pub fn cross_check(
    engine: &[Solution],
    engine_k_max: u64,
    oracle: &OracleResult,
    range: RangeInclusive<u64>,
    mixed_only: bool,
    locate: impl Fn(&Solution) -> Option<String>,
) -> Result<CrossCheckReport, OracleError> {
    if engine_k_max != oracle.k_max {
        return Err(OracleError::Mismatch(format!(
            "engine k_max {engine_k_max} vs oracle k_max {}",
            oracle.k_max
        )));
    }
    if *range.end() > oracle.bound {
        return Err(OracleError::Mismatch(format!(
            "range end {} above oracle bound {}",
            range.end(),
            oracle.bound
        )));
    }
    let expected: BTreeSet<Solution> = oracle.restricted(range, mixed_only).into_iter().collect();
    let got: BTreeSet<Solution> = engine.iter().cloned().collect();
    Ok(CrossCheckReport {
        missing: expected
            .difference(&got)
            .map(|s| (*s, locate(s)))
            .collect(),
        extra: got.difference(&expected).cloned().collect(),
        unverified: engine.iter().filter(|s| !verify_solution(s)).cloned().collect(),
    })
}
