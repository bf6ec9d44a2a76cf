//! The classical infinite families for k = 1 and k = 2 and their scalings to
//! k = s³ and k = 2s³.
//!
//! ```text
//! K1: (9t⁴)³ + (3t − 9t⁴)³ + (1 − 9t³)³ = 1
//! K2: (1 + 6t³)³ + (1 − 6t³)³ + (−6t²)³ = 2
//! ```

use crate::arith::{self, canonicalize, ArithError, Solution, RAW_COORD_LIMIT};

pub const MAX_PARAMETER: i64 = 1_000_000;

/// Triple with coordinates below 2^84 in magnitude.
pub type RawTriple = [i128; 3];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParametricError {
    #[error("family parameter {0} outside [-10^6, 10^6]")]
    ParameterOutOfRange(i64),
    #[error("scale factor must be positive")]
    ZeroScale,
    #[error("scaled coordinate leaves the exact range")]
    ScaleOverflow,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    K1,
    K2,
}

impl FamilyId {
    pub fn generate(self, t: i64) -> Result<RawTriple, ParametricError> {
        match self {
            FamilyId::K1 => param_k1(t),
            FamilyId::K2 => param_k2(t),
        }
    }

    /// Target of the unscaled family.
    pub fn base_k(self) -> u64 {
        match self {
            FamilyId::K1 => 1,
            FamilyId::K2 => 2,
        }
    }
}

fn check_parameter(t: i64) -> Result<i128, ParametricError> {
    if t.unsigned_abs() > MAX_PARAMETER as u64 {
        Err(ParametricError::ParameterOutOfRange(t))
    } else {
        Ok(t as i128)
    }
}

pub fn param_k1(t: i64) -> Result<RawTriple, ParametricError> {
    let t = check_parameter(t)?;
    let t3 = t * t * t;
    let t4 = t3 * t;
    Ok([9 * t4, 3 * t - 9 * t4, 1 - 9 * t3])
}

pub fn param_k2(t: i64) -> Result<RawTriple, ParametricError> {
    let t = check_parameter(t)?;
    let t3 = t * t * t;
    Ok([1 + 6 * t3, 1 - 6 * t3, -6 * t * t])
}

/// Multiplies every coordinate by `s`; the cube sum scales by s³.
pub fn scale_solution(raw: RawTriple, s: u64) -> Result<RawTriple, ParametricError> {
    if s == 0 {
        return Err(ParametricError::ZeroScale);
    }
    let mut out = [0i128; 3];
    for (o, &v) in out.iter_mut().zip(&raw) {
        let scaled = v.checked_mul(s as i128).ok_or(ParametricError::ScaleOverflow)?;
        if scaled.unsigned_abs() >= RAW_COORD_LIMIT as u128 {
            return Err(ParametricError::ScaleOverflow);
        }
        *o = scaled;
    }
    Ok(out)
}

/// A family with a fixed scale factor, streamed over t = 0, 1, −1, 2, −2, …
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamFamily {
    pub family: FamilyId,
    pub scale: u64,
}

impl ParamFamily {
    pub fn new(family: FamilyId, scale: u64) -> Result<Self, ParametricError> {
        if scale == 0 {
            return Err(ParametricError::ZeroScale);
        }
        Ok(ParamFamily { family, scale })
    }

    pub fn k(&self) -> u64 {
        self.family.base_k() * self.scale.pow(3)
    }

    /// Members in parameter order; stops at the parameter or exact-range limit.
    pub fn iter(&self) -> impl Iterator<Item = (i64, RawTriple)> + '_ {
        (0..=2 * MAX_PARAMETER)
            .map(|i| if i % 2 == 1 { (i + 1) / 2 } else { -(i / 2) })
            .map_while(move |t| {
                let raw = self.family.generate(t).ok()?;
                Some((t, scale_solution(raw, self.scale).ok()?))
            })
    }

    /// Canonical members whose largest coordinate is at most `bound`. Members
    /// that differ only in t but share a canonical form appear once.
    pub fn members_up_to(&self, bound: u64) -> Vec<Solution> {
        let mut out = Vec::new();
        for (t, raw) in self.iter() {
            let h = raw.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
            if h > bound as u128 {
                // coordinates grow monotonically in |t| once |t| >= 1
                if t < 0 {
                    break;
                }
                continue;
            }
            let c = raw.map(|v| v as i64);
            if let Ok(sol) = canonicalize(c[0], c[1], c[2]) {
                out.push(sol);
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Identifies a canonical solution as a (scaled) family member, returning the
/// family, the parameter and the scale factor.
pub fn classify(sol: &Solution) -> Option<(FamilyId, i64, u64)> {
    let k = sol.k_u64()?;
    for family in [FamilyId::K1, FamilyId::K2] {
        let base = family.base_k();
        if k % base != 0 {
            continue;
        }
        let s3 = k / base;
        let s = arith::icbrt_floor(s3 as i128) as u64;
        if s == 0 || s.pow(3) != s3 {
            continue;
        }
        let coords = sol.coords();
        if coords.iter().any(|&v| v % s as i64 != 0) {
            continue;
        }
        let reduced: Vec<i128> = coords.iter().map(|&v| (v / s as i64) as i128).collect();
        for t in candidate_parameters(family, &reduced) {
            if let Ok(raw) = family.generate(t) {
                let mut raw_sorted = raw;
                raw_sorted.sort_unstable();
                if raw_sorted[..] == reduced[..] {
                    return Some((family, t, s));
                }
            }
        }
    }
    None
}

// K1 has a coordinate equal to 9t⁴, K2 one equal to −6t²; recover t from it.
fn candidate_parameters(family: FamilyId, reduced: &[i128]) -> Vec<i64> {
    let mut ts = Vec::new();
    for &v in reduced {
        let root = match family {
            FamilyId::K1 if v >= 0 && v % 9 == 0 => nth_root_exact(v / 9, 4),
            FamilyId::K2 if v <= 0 && v % 6 == 0 => nth_root_exact(-v / 6, 2),
            _ => None,
        };
        if let Some(r) = root {
            if r <= MAX_PARAMETER as i128 {
                ts.push(r as i64);
                ts.push(-(r as i64));
            }
        }
    }
    ts.sort_unstable();
    ts.dedup();
    ts
}

fn nth_root_exact(v: i128, n: u32) -> Option<i128> {
    let r = (v as f64).powf(1.0 / n as f64).round() as i128;
    (r.saturating_sub(1)..=r + 1).find(|&c| c >= 0 && c.checked_pow(n) == Some(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{cube_sum_raw, I256};

    #[test]
    fn k1_examples() {
        assert_eq!(param_k1(0).unwrap(), [0, 0, 1]);
        assert_eq!(param_k1(1).unwrap(), [9, -6, -8]);
        assert_eq!(param_k1(2).unwrap(), [144, -138, -71]);
    }

    #[test]
    fn k2_examples() {
        assert_eq!(param_k2(0).unwrap(), [1, 1, 0]);
        assert_eq!(param_k2(1).unwrap(), [7, -5, -6]);
        assert_eq!(param_k2(-1).unwrap(), [-5, 7, -6]);
    }

    #[test]
    fn parameter_range_guard() {
        assert!(param_k1(MAX_PARAMETER).is_ok());
        assert_eq!(
            param_k1(MAX_PARAMETER + 1),
            Err(ParametricError::ParameterOutOfRange(MAX_PARAMETER + 1))
        );
        assert!(param_k2(-MAX_PARAMETER - 1).is_err());
        // the widest members still sum exactly
        assert_eq!(cube_sum_raw(param_k1(MAX_PARAMETER).unwrap()).unwrap(), I256::ONE);
        assert_eq!(cube_sum_raw(param_k2(-MAX_PARAMETER).unwrap()).unwrap(), I256::from(2i64));
    }

    #[test]
    fn scale_examples() {
        let s = scale_solution([0, 0, 1], 2).unwrap();
        assert_eq!(s, [0, 0, 2]);
        assert_eq!(cube_sum_raw(s).unwrap(), I256::from(8i64));
        let s = scale_solution([9, -6, -8], 3).unwrap();
        assert_eq!(s, [27, -18, -24]);
        assert_eq!(cube_sum_raw(s).unwrap(), I256::from(27i64));
        assert_eq!(scale_solution([7, -5, -6], 1).unwrap(), [7, -5, -6]);
        assert_eq!(scale_solution([1, 1, 1], 0), Err(ParametricError::ZeroScale));
        assert_eq!(
            scale_solution(param_k1(MAX_PARAMETER).unwrap(), 10_000),
            Err(ParametricError::ScaleOverflow)
        );
    }

    #[test]
    fn family_stream_order() {
        let fam = ParamFamily::new(FamilyId::K2, 1).unwrap();
        let ts: Vec<i64> = fam.iter().take(5).map(|(t, _)| t).collect();
        assert_eq!(ts, vec![0, 1, -1, 2, -2]);
        assert_eq!(ParamFamily::new(FamilyId::K1, 3).unwrap().k(), 27);
        assert_eq!(ParamFamily::new(FamilyId::K2, 2).unwrap().k(), 16);
    }

    #[test]
    fn members_up_to_bound() {
        let fam = ParamFamily::new(FamilyId::K1, 1).unwrap();
        let m = fam.members_up_to(200);
        // t = 0, ±1, ±2 have largest coordinates 1, 9/15, 144/162
        assert!(m.contains(&Solution::new(-8, -6, 9, 1i64)));
        assert!(m.contains(&Solution::new(-138, -71, 144, 1i64)));
        assert!(m.iter().all(|s| s.height() <= 200 && crate::verify_solution(s)));
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn classify_recognises_members() {
        for t in -20..=20 {
            for s in [1u64, 2, 5] {
                for fam in [FamilyId::K1, FamilyId::K2] {
                    let raw = scale_solution(fam.generate(t).unwrap(), s).unwrap();
                    let c = raw.map(|v| v as i64);
                    let Ok(sol) = canonicalize(c[0], c[1], c[2]) else { continue };
                    let (f, _, sc) = classify(&sol).expect("family member");
                    assert_eq!((f, sc), (fam, s));
                }
            }
        }
        assert_eq!(classify(&Solution::new(1, 1, 2, 10i64)), None);
        assert_eq!(classify(&Solution::new(-284650292555885, 66229832190556, 283450105697727, 74i64)), None);
    }
}
