//! Exact arithmetic for cube sums: verification, canonical forms, the mod 9
//! admissibility rule and integer cube roots.

mod wide;

pub use wide::{ParseI256Error, I256};

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Largest coordinate magnitude accepted by [`cube_sum`] and stored in a [`Solution`].
pub const COORD_LIMIT: i64 = 1_000_000_000_000_000_000;

/// Largest coordinate magnitude (exclusive) accepted by [`cube_sum_raw`]: cubes
/// stay below 2^252, sums of three below 2^254.
pub const RAW_COORD_LIMIT: i128 = 1 << 84;

/// Coordinates wider than [`COORD_LIMIT`] or [`RAW_COORD_LIMIT`] are
/// rejected instead of wrapping.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("coordinate {0} exceeds the exact arithmetic range")]
    OutOfRange(i128),
    #[error("triple ({0}, {1}, {2}) sums to zero and has no canonical form")]
    ZeroSum(i64, i64, i64),
    #[error("malformed solution line: {0}")]
    Parse(String),
    #[error("target {0} is not admissible")]
    InadmissibleTarget(u64),
    #[error("target {target} exceeds k_max {k_max}")]
    TargetAboveMax { target: u64, k_max: u64 },
    #[error("k_max must be positive")]
    ZeroKMax,
}

fn check_coord(v: i64) -> Result<(), ArithError> {
    if v.unsigned_abs() > COORD_LIMIT as u64 {
        Err(ArithError::OutOfRange(v as i128))
    } else {
        Ok(())
    }
}

fn cube(v: i128) -> I256 {
    let w = I256::from(v);
    w.checked_pow3().expect("cube within 256 bits")
}

/// Exact x³ + y³ + z³ for coordinates of magnitude at most 10¹⁸.
pub fn cube_sum(x: i64, y: i64, z: i64) -> Result<I256, ArithError> {
    check_coord(x)?;
    check_coord(y)?;
    check_coord(z)?;
    Ok(cube(x as i128) + cube(y as i128) + cube(z as i128))
}

/// Exact cube sum for wider raw triples (|coordinate| < 2^84), as produced by
/// the parametric families at large parameters.
pub fn cube_sum_raw(t: [i128; 3]) -> Result<I256, ArithError> {
    for &v in &t {
        if v.unsigned_abs() >= RAW_COORD_LIMIT as u128 {
            return Err(ArithError::OutOfRange(v));
        }
    }
    Ok(cube(t[0]) + cube(t[1]) + cube(t[2]))
}

/// `false` iff k ≡ ±4 (mod 9) or k = 0.
pub fn mod9_admissible<K: Into<I256>>(k: K) -> bool {
    let k: I256 = k.into();
    if k.is_zero() {
        return false;
    }
    !matches!(k.rem_euclid_u64(9), 4 | 5)
}

/// A signed triple together with its target. Files and the engine only ever
/// produce canonical solutions (x ≤ y ≤ z, k ≥ 1); the fields are public so
/// that external lists can be loaded and checked with [`verify_solution`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Solution {
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub k: I256,
}

impl Solution {
    pub fn new(x: i64, y: i64, z: i64, k: impl Into<I256>) -> Self {
        Solution {
            x,
            y,
            z,
            k: k.into(),
        }
    }

    /// Largest coordinate magnitude; the quantity decades are keyed on.
    pub fn height(&self) -> u64 {
        self.x
            .unsigned_abs()
            .max(self.y.unsigned_abs())
            .max(self.z.unsigned_abs())
    }

    pub fn coords(&self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_canonical(&self) -> bool {
        self.x <= self.y && self.y <= self.z && self.k.signum() > 0
    }

    /// Target as an unsigned integer when it fits.
    pub fn k_u64(&self) -> Option<u64> {
        self.k.to_i128().and_then(|v| u64::try_from(v).ok())
    }
}

/// File order: (k, z, y, x).
impl Ord for Solution {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k
            .cmp(&other.k)
            .then(self.z.cmp(&other.z))
            .then(self.y.cmp(&other.y))
            .then(self.x.cmp(&other.x))
    }
}

impl PartialOrd for Solution {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.k, self.x, self.y, self.z)
    }
}

impl FromStr for Solution {
    type Err = ArithError;

    /// Parses a `k x y z` line.
    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(line.to_string());
        let mut fields = line.split_whitespace();
        let k: I256 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let mut coords = [0i64; 3];
        for c in coords.iter_mut() {
            *c = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        }
        if fields.next().is_some() {
            return Err(bad());
        }
        Ok(Solution::new(coords[0], coords[1], coords[2], k))
    }
}

/// True iff the cube sum equals `k` exactly and `k` is admissible.
pub fn verify_solution(s: &Solution) -> bool {
    match cube_sum(s.x, s.y, s.z) {
        Ok(sum) => sum == s.k && mod9_admissible(s.k),
        Err(_) => false,
    }
}

/// Representative of the class of (x, y, z) under permutations and global
/// negation: sorted coordinates and positive k.
pub fn canonicalize(x: i64, y: i64, z: i64) -> Result<Solution, ArithError> {
    let sum = cube_sum(x, y, z)?;
    if sum.is_zero() {
        return Err(ArithError::ZeroSum(x, y, z));
    }
    let (mut c, k) = if sum.is_negative() {
        ([-x, -y, -z], -sum)
    } else {
        ([x, y, z], sum)
    };
    c.sort_unstable();
    Ok(Solution {
        x: c[0],
        y: c[1],
        z: c[2],
        k,
    })
}

/// Targets searched in a run: every admissible k in [1, k_max], or an explicit
/// subset of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSet {
    k_max: u64,
    explicit: Option<BTreeSet<u64>>,
}

impl TargetSet {
    pub fn up_to(k_max: u64) -> Result<Self, ArithError> {
        if k_max == 0 {
            return Err(ArithError::ZeroKMax);
        }
        Ok(TargetSet {
            k_max,
            explicit: None,
        })
    }

    pub fn explicit(k_max: u64, targets: impl IntoIterator<Item = u64>) -> Result<Self, ArithError> {
        if k_max == 0 {
            return Err(ArithError::ZeroKMax);
        }
        let mut set = BTreeSet::new();
        for t in targets {
            if t > k_max {
                return Err(ArithError::TargetAboveMax { target: t, k_max });
            }
            if !mod9_admissible(t) {
                return Err(ArithError::InadmissibleTarget(t));
            }
            set.insert(t);
        }
        Ok(TargetSet {
            k_max,
            explicit: Some(set),
        })
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn explicit_targets(&self) -> Option<&BTreeSet<u64>> {
        self.explicit.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        matches!(&self.explicit, Some(s) if s.is_empty())
    }

    pub fn contains(&self, k: u64) -> bool {
        if k == 0 || k > self.k_max || !mod9_admissible(k) {
            return false;
        }
        match &self.explicit {
            Some(set) => set.contains(&k),
            None => true,
        }
    }

    pub fn contains_wide(&self, k: &I256) -> bool {
        match k.to_i128().and_then(|v| u64::try_from(v).ok()) {
            Some(v) => self.contains(v),
            None => false,
        }
    }

    /// All members in increasing order.
    pub fn members(&self) -> Vec<u64> {
        match &self.explicit {
            Some(set) => set.iter().copied().collect(),
            None => (1..=self.k_max).filter(|&k| mod9_admissible(k)).collect(),
        }
    }

    /// Stable textual form, used in run fingerprints.
    pub fn describe(&self) -> String {
        match &self.explicit {
            None => format!("all<= {}", self.k_max),
            Some(set) => {
                let list: Vec<String> = set.iter().map(|k| k.to_string()).collect();
                format!("k_max {} explicit [{}]", self.k_max, list.join(","))
            }
        }
    }
}

/// Largest r with r³ ≤ n. The float estimate is only a seed; the result is
/// corrected with exact integer comparisons.
pub fn icbrt_floor(n: i128) -> i128 {
    if n < 0 {
        return -icbrt_ceil(-n);
    }
    let mut r = (n as f64).cbrt().round() as i128;
    let cube_le = |r: i128, n: i128| match r.checked_mul(r).and_then(|s| s.checked_mul(r)) {
        Some(c) => c <= n,
        None => false,
    };
    while r > 0 && !cube_le(r, n) {
        r -= 1;
    }
    while cube_le(r + 1, n) {
        r += 1;
    }
    r
}

/// Smallest r with r³ ≥ n.
pub fn icbrt_ceil(n: i128) -> i128 {
    if n < 0 {
        return -icbrt_floor(-n);
    }
    let r = icbrt_floor(n);
    if r * r * r == n {
        r
    } else {
        r + 1
    }
}

/// Exact a³ + b³ − c³ when its magnitude is at most `bound`, `None` otherwise.
///
/// The wrapping 128-bit evaluation agrees with the true value modulo 2^128, so
/// a large wrapped result rules the candidate out without wide arithmetic; a
/// small one is confirmed exactly.
pub fn small_cube_difference(a: i64, b: i64, c: i64, bound: u64) -> Option<i64> {
    let cw = |v: i64| {
        let v = v as i128;
        v.wrapping_mul(v).wrapping_mul(v)
    };
    let wrapped = cw(a).wrapping_add(cw(b)).wrapping_sub(cw(c));
    if wrapped.unsigned_abs() > bound as u128 {
        return None;
    }
    let exact = cube_sum(a, b, -c).ok()?;
    if exact.to_i128()? != wrapped {
        return None;
    }
    i64::try_from(wrapped).ok()
}
