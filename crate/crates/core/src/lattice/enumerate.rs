//! Fincke–Pohst enumeration of the lattice points of a frame's search box.
//!
//! The box, scaled to a cube, is relaxed to its circumscribed ball. Enumeration runs in the
//! coordinates of the reduced basis, shifted by an integer point next to the
//! box center so that every floating quantity stays small.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::reduce::{adjugate, det_unimodular, gram_schmidt_f64, ReducedBasis, Unimodular};
use super::{LatticeError, LinearFormFrame};
use crate::arith::{canonicalize, small_cube_difference, Solution, TargetSet, I256};
use crate::geometry::ratio_to_f64;

/// Relative inflation of the enumeration radius.
pub const RADIUS_INFLATION: f64 = 1e-9;

/// Hard cap on visited lattice points per frame.
pub const MAX_POINTS_PER_FRAME: u64 = 200_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrameOutcome {
    /// Canonical, sorted, deduplicated.
    pub solutions: Vec<Solution>,
    /// Lattice points inside the enumeration ball.
    pub inspected: u64,
}

/// Nearest integer to n/d (d > 0), halves rounded up.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let twice: BigInt = n * 2 + d;
    num_integer::Integer::div_floor(&twice, &(d * 2))
}

/// Residue of a³ + b³ − c³ modulo 9 from the residues of a, b, c.
fn cube_difference_mod9(a: i64, b: i64, c: i64) -> i64 {
    let cube9 = |v: i64| {
        let r = v.rem_euclid(9);
        r * r * r % 9
    };
    (cube9(a) + cube9(b) - cube9(c)).rem_euclid(9)
}

/// Turns a lattice point into a solution if its cube difference is a target.
fn check_candidate(a: i64, b: i64, c: i64, targets: &TargetSet) -> Option<Solution> {
    let r = cube_difference_mod9(a, b, c);
    if r == 4 || r == 5 {
        return None;
    }
    let s = small_cube_difference(a, b, c, targets.k_max())?;
    if s == 0 || !targets.contains(s.unsigned_abs()) {
        return None;
    }
    let sol = if s > 0 {
        canonicalize(a, b, -c)
    } else {
        canonicalize(-a, -b, c)
    }
    .ok()?;
    debug_assert_eq!(sol.k, I256::from(s.unsigned_abs()));
    Some(sol)
}

/// All lattice points of the frame's ball whose sign-normalized triple
/// (a, b ≥ 0, c in range) has an admissible cube difference in the target set.
pub fn enumerate_frame(
    frame: &LinearFormFrame,
    rb: &ReducedBasis,
    targets: &TargetSet,
) -> Result<FrameOutcome, LatticeError> {
    if targets.is_empty() {
        return Ok(FrameOutcome::default());
    }
    // center in reduced coordinates: U⁻¹·T⁻¹κ, with U⁻¹ = det(U)·adj(U)
    let (v_num, den) = frame.point_center();
    let det_u = det_unimodular(&rb.u);
    let adj = adjugate(&rb.u);
    let w_num: [BigInt; 3] =
        std::array::from_fn(|i| (0..3).map(|j| &adj[i][j] * &v_num[j]).sum::<BigInt>() * &det_u);
    let w0: [BigInt; 3] = std::array::from_fn(|i| round_div(&w_num[i], den));
    let offset: [f64; 3] = std::array::from_fn(|i| ratio_to_f64(&(&w_num[i] - &w0[i] * den), den));
    // base lattice point U·w0
    let mut base = [0i128; 3];
    for (r, out) in base.iter_mut().enumerate() {
        let v: BigInt = (0..3).map(|j| BigInt::from(rb.u[r][j]) * &w0[j]).sum();
        *out = v
            .to_i128()
            .ok_or_else(|| LatticeError::NumericalFailure("frame center exceeds 128 bits".into()))?;
    }
    // the box is the unit cube in normalized coordinates; enumerate its
    // circumscribed ball of radius √3
    let (gs_norms2, mu) = gram_schmidt_f64(frame.normalized_matrix(), &rb.u)?;
    let r2 = 3.0 * (1.0 + RADIUS_INFLATION).powi(2);
    let mut state = Walk {
        u: &rb.u,
        gs_norms2,
        mu,
        offset,
        r2,
        w: [0; 3],
        inspected: 0,
        frame,
        base,
        targets,
        found: Vec::new(),
    };
    state.level(2, 0.0)?;
    let Walk {
        mut found, inspected, ..
    } = state;
    found.sort();
    found.dedup();
    Ok(FrameOutcome {
        solutions: found,
        inspected,
    })
}

struct Walk<'a> {
    u: &'a Unimodular,
    gs_norms2: [f64; 3],
    mu: [[f64; 3]; 3],
    offset: [f64; 3],
    r2: f64,
    w: [i64; 3],
    inspected: u64,
    frame: &'a LinearFormFrame,
    base: [i128; 3],
    targets: &'a TargetSet,
    found: Vec<Solution>,
}

impl Walk<'_> {
    fn level(&mut self, i: usize, partial: f64) -> Result<(), LatticeError> {
        // projection of (w − offset) onto b*_i is w_i − center
        let mut center = self.offset[i];
        for j in i + 1..3 {
            center -= self.mu[j][i] * (self.w[j] as f64 - self.offset[j]);
        }
        let n = self.gs_norms2[i];
        let rem = (self.r2 - partial).max(0.0);
        let r = (rem / n).sqrt();
        let slack = RADIUS_INFLATION * (1.0 + r + center.abs());
        let lo = (center - r - slack).ceil();
        let hi = (center + r + slack).floor();
        if !(lo.is_finite() && hi.is_finite()) || hi - lo > MAX_POINTS_PER_FRAME as f64 {
            return Err(LatticeError::EnumerationLimit(self.frame.flagstone_index()));
        }
        let (lo, hi) = (lo as i64, hi as i64);
        for wi in lo..=hi {
            self.w[i] = wi;
            let y = (wi as f64 - center).powi(2) * n;
            if partial + y > self.r2 * (1.0 + RADIUS_INFLATION) {
                continue;
            }
            if i == 0 {
                self.inspected += 1;
                if self.inspected > MAX_POINTS_PER_FRAME {
                    return Err(LatticeError::EnumerationLimit(self.frame.flagstone_index()));
                }
                self.visit()?;
            } else {
                self.level(i - 1, partial + y)?;
            }
        }
        Ok(())
    }

    fn visit(&mut self) -> Result<(), LatticeError> {
        let mut v = self.base;
        for (r, out) in v.iter_mut().enumerate() {
            for j in 0..3 {
                let t = self.u[r][j]
                    .checked_mul(self.w[j] as i128)
                    .and_then(|t| out.checked_add(t))
                    .ok_or_else(|| LatticeError::NumericalFailure("lattice point exceeds 128 bits".into()))?;
                *out = t;
            }
        }
        let [a, b, c] = v;
        if c < self.frame.c_lo() as i128 || c > self.frame.c_hi() as i128 || a < 0 || b < 0 {
            return Ok(());
        }
        // 0 ≤ a, b and |a³ + b³ − c³| ≤ k_max imply a, b ≤ c + 1
        if a > c + 1 || b > c + 1 {
            return Ok(());
        }
        if let Some(sol) = check_candidate(a as i64, b as i64, c as i64, self.targets) {
            self.found.push(sol);
        }
        Ok(())
    }
}

/// Soft bound 8·Π(1 + ‖b_i‖)/|det T| on the points a frame should inspect.
pub fn volume_bound(frame: &LinearFormFrame, rb: &ReducedBasis) -> f64 {
    let det = frame.det().abs();
    let det = ratio_to_f64(det.numer(), det.denom());
    8.0 * rb.norms().iter().map(|n| 1.0 + n).product::<f64>() / det
}
