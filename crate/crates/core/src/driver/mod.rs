//! Run orchestration: partitioning into work units, checkpointed parallel
//! execution, and the merged, verified output file.
//!
//! Solutions of height at most ⌊√k_max⌋ come from a direct scan over every
//! sign pattern. Above that height every solution has mixed signs and its
//! lone-signed coordinate is the (possibly tied) largest, so the lattice
//! frames over factor-2 height ranges [lo, 2·lo − 1] find the rest.

mod checkpoint;
pub mod files;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_integer::Roots;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use checkpoint::parts_dir;
use checkpoint::{Checkpoint, LockGuard};
pub use files::{format_solutions, read_solutions, verify_file, verify_text, write_atomic, VerifyReport};

use crate::arith::{icbrt_ceil, icbrt_floor, verify_solution, ArithError, Solution, TargetSet};
use crate::geometry::{make_covering, Arc, CoveringPlan, GeometryError, DEFAULT_MARGIN};
use crate::lattice::{search_flagstone, LatticeError};

pub const MAX_HEIGHT: u64 = 1_000_000_000_000_000_000;

/// Largest height the direct scan accepts.
pub const MAX_DIRECT_HEIGHT: u64 = 100_000;

const BATCH_PER_WORKER: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("checkpoint belongs to a different configuration (stored {stored}, current {current})")]
    FingerprintMismatch { stored: String, current: String },
    #[error("checkpoint is locked by another run ({0})")]
    Locked(PathBuf),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("work unit {unit}: {source}")]
    Lattice { unit: WorkUnit, source: LatticeError },
    #[error("{} solutions failed exact verification", .0.len())]
    Verification(Vec<Solution>),
}

impl DriverError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Verification(_) => 2,
            DriverError::FingerprintMismatch { .. } => 3,
            DriverError::Lattice { source, .. } if source.is_numerical() => 4,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Heights (largest coordinate magnitudes) searched: [b_lo, b_hi].
    pub b_lo: u64,
    pub b_hi: u64,
    pub targets: TargetSet,
    pub margin: f64,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    /// Stop after this many work units; the run can be resumed.
    pub max_units: Option<usize>,
}

impl SearchConfig {
    pub fn new(b_lo: u64, b_hi: u64, targets: TargetSet) -> Self {
        SearchConfig {
            b_lo,
            b_hi,
            targets,
            margin: DEFAULT_MARGIN,
            workers: 1,
            checkpoint: None,
            output: None,
            manifest: None,
            max_units: None,
        }
    }

    pub fn k_max(&self) -> u64 {
        self.targets.k_max()
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        if !(1 <= self.b_lo && self.b_lo < self.b_hi && self.b_hi <= MAX_HEIGHT) {
            return Err(DriverError::Config(format!(
                "need 1 <= B_lo < B_hi <= 10^18, got [{}, {}]",
                self.b_lo, self.b_hi
            )));
        }
        if !(self.margin.is_finite() && self.margin >= 1.0) {
            return Err(DriverError::Config(format!("margin {} must be >= 1", self.margin)));
        }
        if self.workers == 0 {
            return Err(DriverError::Config("workers must be >= 1".into()));
        }
        if self.b_lo <= direct_bound(self.k_max()) && direct_bound(self.k_max()).min(self.b_hi) > MAX_DIRECT_HEIGHT {
            return Err(DriverError::Config(format!(
                "direct scan up to height {} exceeds {MAX_DIRECT_HEIGHT}; raise B_lo",
                direct_bound(self.k_max())
            )));
        }
        Ok(())
    }

    /// Everything that determines the output; workers and paths excluded.
    pub fn canonical_string(&self) -> String {
        format!(
            "threecubes run v1\nb_lo {}\nb_hi {}\ntargets {}\nmargin {:?}\n",
            self.b_lo,
            self.b_hi,
            self.targets.describe(),
            self.margin
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WorkUnit {
    Direct,
    Tile { range: usize, flagstone: usize },
}

impl fmt::Display for WorkUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkUnit::Direct => write!(f, "direct"),
            WorkUnit::Tile { range, flagstone } => write!(f, "tile {range} {flagstone}"),
        }
    }
}

impl WorkUnit {
    fn part_name(&self) -> String {
        match self {
            WorkUnit::Direct => "direct.txt".into(),
            WorkUnit::Tile { range, flagstone } => format!("r{range}-f{flagstone}.txt"),
        }
    }
}

/// ⌊√k_max⌋: heights up to here belong to the direct scan.
pub fn direct_bound(k_max: u64) -> u64 {
    k_max.sqrt()
}

/// Inclusive height range of one covering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubRange {
    pub lo: u64,
    pub hi: u64,
}

/// Factor-2 ranges [lo, 2·lo − 1] tiling [max(b_lo, ⌊√k_max⌋ + 1), b_hi].
/// A one-height tail is merged into its predecessor; a lone one-height range
/// is widened upward and its surplus filtered from the output.
pub fn sub_ranges(b_lo: u64, b_hi: u64, k_max: u64) -> Vec<SubRange> {
    let mut out: Vec<SubRange> = Vec::new();
    let mut lo = b_lo.max(direct_bound(k_max) + 1);
    while lo <= b_hi {
        let hi = lo.saturating_mul(2).saturating_sub(1).min(b_hi);
        if hi == lo {
            match out.last_mut() {
                Some(prev) => prev.hi = hi,
                None => out.push(SubRange { lo, hi: lo + 1 }),
            }
        } else {
            out.push(SubRange { lo, hi });
        }
        lo = hi + 1;
    }
    out
}

/// All canonical solutions with height in [lo, hi] and k in `targets`, by
/// scanning x ≤ y and solving for z. Requires hi ≤ [`MAX_DIRECT_HEIGHT`].
pub fn direct_scan(lo: u64, hi: u64, targets: &TargetSet) -> Vec<Solution> {
    assert!(hi <= MAX_DIRECT_HEIGHT);
    let h = hi as i64;
    let k_max = targets.k_max() as i128;
    let mut out: Vec<Solution> = (-h..=h)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut found = Vec::new();
            for y in x..=h {
                let base = (x as i128).pow(3) + (y as i128).pow(3);
                let z_lo = icbrt_ceil(1 - base).max(y as i128);
                let z_hi = icbrt_floor(k_max - base).min(h as i128);
                for z in z_lo..=z_hi {
                    let k = base + z.pow(3);
                    let s = Solution::new(x, y, z as i64, k);
                    if targets.contains(k as u64) && (lo..=hi).contains(&s.height()) {
                        found.push(s);
                    }
                }
            }
            found
        })
        .collect();
    out.sort();
    out
}

/// Coverings, units and fingerprint of a configuration.
pub struct RunPlan {
    pub config: SearchConfig,
    pub direct: Option<SubRange>,
    pub ranges: Vec<SubRange>,
    pub coverings: Vec<CoveringPlan>,
    pub fingerprint: String,
}

pub fn plan_run(config: &SearchConfig) -> Result<RunPlan, DriverError> {
    config.validate()?;
    let k_max = config.k_max();
    let s = direct_bound(k_max);
    let direct = (config.b_lo <= s).then(|| SubRange {
        lo: config.b_lo,
        hi: s.min(config.b_hi),
    });
    let ranges = sub_ranges(config.b_lo, config.b_hi, k_max);
    let coverings = ranges
        .par_iter()
        .map(|r| make_covering(&Arc::full(), r.lo, r.hi, k_max, config.margin))
        .collect::<Result<Vec<_>, _>>()?;
    let mut hasher = Sha256::new();
    hasher.update(config.canonical_string().as_bytes());
    for c in &coverings {
        hasher.update(c.to_manifest().as_bytes());
    }
    let fingerprint = hex::encode(hasher.finalize());
    Ok(RunPlan {
        config: config.clone(),
        direct,
        ranges,
        coverings,
        fingerprint,
    })
}

impl RunPlan {
    pub fn units(&self) -> Vec<WorkUnit> {
        let mut units = Vec::new();
        if self.direct.is_some() {
            units.push(WorkUnit::Direct);
        }
        for (r, c) in self.coverings.iter().enumerate() {
            units.extend((0..c.len()).map(|t| WorkUnit::Tile { range: r, flagstone: t }));
        }
        units
    }

    /// Concatenated covering manifests, one block per sub-range.
    pub fn manifest_text(&self) -> String {
        let mut s = String::new();
        for (r, c) in self.coverings.iter().enumerate() {
            s.push_str(&format!("# sub-range {r}\n"));
            s.push_str(&c.to_manifest());
        }
        s
    }

    pub fn execute(&self, unit: WorkUnit) -> Result<Vec<Solution>, DriverError> {
        let targets = &self.config.targets;
        match unit {
            WorkUnit::Direct => {
                let d = self.direct.expect("direct unit without direct range");
                Ok(direct_scan(d.lo, d.hi, targets))
            }
            WorkUnit::Tile { range, flagstone } => {
                let r = self.ranges[range];
                search_flagstone(&self.coverings[range], flagstone, r.lo, r.hi, targets)
                    .map(|o| o.solutions)
                    .map_err(|source| DriverError::Lattice { unit, source })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    /// Every unit is done; the merged output.
    Complete(Vec<Solution>),
    /// Stopped early by `max_units`.
    Interrupted { remaining: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub units_total: usize,
    /// Units executed by this invocation.
    pub units_run: usize,
    pub fingerprint: String,
}

fn read_part(dir: &Path, unit: WorkUnit) -> Result<Vec<Solution>, DriverError> {
    let path = dir.join(unit.part_name());
    if !path.exists() {
        return Ok(Vec::new());
    }
    let (ok, bad) = read_solutions(&path)?;
    if let Some(e) = bad.first() {
        return Err(DriverError::Checkpoint(format!(
            "{} line {}: {}",
            path.display(),
            e.line,
            e.reason
        )));
    }
    Ok(ok.into_iter().map(|(_, s)| s).collect())
}

/// Executes (or resumes) a run. On completion the output file, if
/// configured, holds the sorted canonical union; an interrupted run leaves
/// the output untouched.
pub fn run(config: &SearchConfig) -> Result<RunOutcome, DriverError> {
    let plan = plan_run(config)?;
    if let Some(m) = &config.manifest {
        write_atomic(m, &plan.manifest_text())?;
    }
    let _lock = match &config.checkpoint {
        Some(p) => Some(LockGuard::acquire(p)?),
        None => None,
    };
    let mut ckpt = match &config.checkpoint {
        Some(p) => {
            let c = Checkpoint::open(p, &plan.fingerprint)?;
            fs::create_dir_all(c.parts_dir())?;
            Some(c)
        }
        None => None,
    };

    let units = plan.units();
    let pending: Vec<WorkUnit> = units
        .iter()
        .copied()
        .filter(|u| ckpt.as_ref().is_none_or(|c| !c.completed().contains(u)))
        .collect();
    let budget = config.max_units.unwrap_or(usize::MAX).min(pending.len());
    log::info!(
        "{} work units, {} pending, running {budget} (fingerprint {})",
        units.len(),
        pending.len(),
        &plan.fingerprint[..16]
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| DriverError::Config(e.to_string()))?;
    let mut memory: BTreeMap<WorkUnit, Vec<Solution>> = BTreeMap::new();
    for batch in pending[..budget].chunks(config.workers * BATCH_PER_WORKER) {
        let results: Vec<Result<Vec<Solution>, DriverError>> =
            pool.install(|| batch.par_iter().map(|&u| plan.execute(u)).collect());
        for (&unit, res) in batch.iter().zip(results) {
            let sols = res?;
            match ckpt.as_mut() {
                Some(c) => {
                    if !sols.is_empty() {
                        write_atomic(&c.parts_dir().join(unit.part_name()), &format_solutions(&sols))?;
                    }
                    c.record(unit, sols.len())?;
                }
                None => {
                    memory.insert(unit, sols);
                }
            }
        }
    }

    let remaining = pending.len() - budget;
    if remaining > 0 {
        return Ok(RunOutcome {
            status: RunStatus::Interrupted { remaining },
            units_total: units.len(),
            units_run: budget,
            fingerprint: plan.fingerprint,
        });
    }

    let mut all = Vec::new();
    match &ckpt {
        Some(c) => {
            let dir = c.parts_dir();
            for &u in &units {
                all.extend(read_part(&dir, u)?);
            }
        }
        None => all.extend(memory.into_values().flatten()),
    }
    let range = config.b_lo..=config.b_hi;
    all.retain(|s| range.contains(&s.height()));
    all.sort();
    all.dedup();
    let bad: Vec<Solution> = all.iter().filter(|s| !verify_solution(s)).cloned().collect();
    if !bad.is_empty() {
        return Err(DriverError::Verification(bad));
    }
    if let Some(out) = &config.output {
        write_atomic(out, &format_solutions(&all))?;
    }
    Ok(RunOutcome {
        status: RunStatus::Complete(all),
        units_total: units.len(),
        units_run: budget,
        fingerprint: plan.fingerprint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_range_partition() {
        let r = sub_ranges(1, 10_000, 1000);
        assert_eq!(r[0], SubRange { lo: 32, hi: 63 });
        assert_eq!(r.last().unwrap().hi, 10_000);
        for w in r.windows(2) {
            assert_eq!(w[0].hi + 1, w[1].lo);
        }
        assert!(r.iter().all(|s| s.lo < s.hi && s.hi <= 2 * s.lo));
        // tail of one height merges into the previous range
        let r = sub_ranges(100, 200, 10);
        assert_eq!(r, vec![SubRange { lo: 100, hi: 200 }]);
        let r = sub_ranges(40, 40, 10);
        assert_eq!(r, vec![SubRange { lo: 40, hi: 41 }]);
        assert!(sub_ranges(1, 31, 1000).is_empty());
    }

    #[test]
    fn direct_scan_small() {
        let t = TargetSet::up_to(1000).unwrap();
        let d = direct_scan(1, 31, &t);
        assert!(d.contains(&Solution::new(1, 1, 1, 3i64)));
        assert!(d.contains(&Solution::new(-8, -6, 9, 1i64)));
        assert!(d.iter().all(|s| verify_solution(s) && s.is_canonical() && s.height() <= 31));
        let d2 = direct_scan(10, 31, &t);
        assert!(d2.iter().all(|s| s.height() >= 10));
    }

    #[test]
    fn config_validation() {
        let t = TargetSet::up_to(100).unwrap();
        assert!(SearchConfig::new(1, 100, t.clone()).validate().is_ok());
        assert!(SearchConfig::new(100, 100, t.clone()).validate().is_err());
        assert!(SearchConfig::new(0, 100, t.clone()).validate().is_err());
        let mut c = SearchConfig::new(1, 100, t.clone());
        c.margin = 0.5;
        assert!(c.validate().is_err());
        c.margin = 2.0;
        c.workers = 0;
        assert!(c.validate().is_err());
        let huge = TargetSet::up_to(1 << 40).unwrap();
        assert!(SearchConfig::new(1, 1 << 30, huge.clone()).validate().is_err());
        assert!(SearchConfig::new(1 << 21, 1 << 30, huge).validate().is_ok());
    }

    #[test]
    fn fingerprint_ignores_workers_and_paths() {
        let t = TargetSet::up_to(50).unwrap();
        let a = SearchConfig::new(1, 200, t.clone());
        let mut b = a.clone();
        b.workers = 4;
        b.output = Some("x".into());
        assert_eq!(plan_run(&a).unwrap().fingerprint, plan_run(&b).unwrap().fingerprint);
        let mut c = a.clone();
        c.margin = 3.0;
        assert_ne!(plan_run(&a).unwrap().fingerprint, plan_run(&c).unwrap().fingerprint);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(DriverError::Verification(vec![]).exit_code(), 2);
        let e = DriverError::FingerprintMismatch {
            stored: "a".into(),
            current: "b".into(),
        };
        assert_eq!(e.exit_code(), 3);
        let e = DriverError::Lattice {
            unit: WorkUnit::Direct,
            source: LatticeError::NumericalFailure("x".into()),
        };
        assert_eq!(e.exit_code(), 4);
        assert_eq!(DriverError::Config("x".into()).exit_code(), 1);
    }
}
