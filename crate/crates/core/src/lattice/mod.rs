//! Lattice search: one frame per flagstone and denominator range, reduced
//! and enumerated, with every candidate checked exactly.
//!
//! A mixed-sign solution has one coordinate whose sign differs from the other
//! two. Writing the magnitudes of the two like-signed coordinates as a ≤ b and
//! that of the lone one as c gives a³ + b³ − c³ = ±k, and the point
//! (a/c, b/c) lies near the curve X³ + Y³ = 1.

pub mod enumerate;
pub mod reduce;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

pub use enumerate::{enumerate_frame, FrameOutcome};
pub use reduce::{reduce_matrix, RationalMatrix, ReducedBasis, Unimodular};

use crate::arith::{Solution, TargetSet};
use crate::geometry::{CoveringPlan, Flagstone, Fix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("degenerate frame: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("frame for flagstone {0} holds too many lattice points")]
    EnumerationLimit(usize),
    #[error("flagstone {index}: {source}")]
    InFlagstone {
        index: usize,
        #[source]
        source: Box<LatticeError>,
    },
}

impl LatticeError {
    fn in_flagstone(self, index: usize) -> Self {
        match self {
            e @ LatticeError::InFlagstone { .. } => e,
            e => LatticeError::InFlagstone {
                index,
                source: Box::new(e),
            },
        }
    }

    pub fn is_numerical(&self) -> bool {
        match self {
            LatticeError::NumericalFailure(_) | LatticeError::EnumerationLimit(_) => true,
            LatticeError::InFlagstone { source, .. } => source.is_numerical(),
            LatticeError::Degenerate(_) => false,
        }
    }
}

/// Sign of a³ + b³ − c³ relative to k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// a³ + b³ − c³ = +k: two positive coordinates, one negative.
    Plus,
    /// a³ + b³ − c³ = −k: one positive coordinate, two negative.
    Minus,
}

/// Nonnegative search coordinates of a mixed-sign triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateTriple {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

/// Maps a mixed-sign triple to its search coordinates (a ≤ b, c the lone
/// sign) and the orientation of its cube difference relative to k = x³+y³+z³.
///
/// A zero coordinate joins the like-signed pair. Returns `None` when all
/// nonzero coordinates share a sign, or when the sum is zero.
pub fn sign_normalize(x: i64, y: i64, z: i64) -> Option<(CandidateTriple, Orientation)> {
    let coords = [x, y, z];
    let pos = coords.iter().filter(|&&v| v > 0).count();
    let neg = coords.iter().filter(|&&v| v < 0).count();
    if pos == 0 || neg == 0 {
        return None;
    }
    let lone_positive = if pos == 1 && neg == 1 {
        // one zero: the larger magnitude is the lone coordinate
        let p = *coords.iter().find(|&&v| v > 0)?;
        let n = *coords.iter().find(|&&v| v < 0)?;
        p.unsigned_abs() > n.unsigned_abs()
    } else {
        pos == 1
    };
    let lone_idx = coords
        .iter()
        .position(|&v| if lone_positive { v > 0 } else { v < 0 })?;
    let mut pair: Vec<i64> = (0..3).filter(|&i| i != lone_idx).map(|i| coords[i].abs()).collect();
    pair.sort_unstable();
    let t = CandidateTriple {
        a: pair[0],
        b: pair[1],
        c: coords[lone_idx].abs(),
    };
    let k = crate::arith::cube_sum(x, y, z).ok()?;
    if k.is_zero() {
        return None;
    }
    // with the lone coordinate negative, x³+y³+z³ = a³ + b³ − c³
    let same = lone_positive == k.is_negative();
    Some((t, if same { Orientation::Plus } else { Orientation::Minus }))
}

/// The linear forms of one flagstone over denominators [c_lo, c_hi]:
///
/// ```text
/// L1 = (a − x0·c)/(w·c_hi)
/// L2 = (b − m·a − q·c)/((h/2)·c_hi)
/// L3 = c/c_hi
/// ```
///
/// Every admissible point of the flagstone's pyramid satisfies
/// |L − center| ≤ half_widths componentwise, with
/// center = (1/2, 0, (c_lo + c_hi)/(2·c_hi)) and
/// half_widths = (1/2, 1, (c_hi − c_lo)/(2·c_hi)).
#[derive(Clone, Debug)]
pub struct LinearFormFrame {
    t: RationalMatrix,
    // rows divided by the half widths: the box becomes a cube of side 2
    normalized: RationalMatrix,
    center: [BigRational; 3],
    // T⁻¹·center as numerators over one denominator
    point_center: ([BigInt; 3], BigInt),
    half_widths: [f64; 3],
    flagstone_index: usize,
    c_lo: u64,
    c_hi: u64,
}

pub fn build_frame(f: &Flagstone, flagstone_index: usize, c_lo: u64, c_hi: u64) -> Result<LinearFormFrame, LatticeError> {
    if c_lo == 0 || c_lo >= c_hi {
        return Err(LatticeError::Degenerate(format!("denominator range [{c_lo}, {c_hi}]")));
    }
    let w = f.width();
    if w <= Fix::zero() || *f.height() <= Fix::zero() {
        return Err(LatticeError::Degenerate("flagstone width and height must be positive".into()));
    }
    let s = Fix::scale();
    let ch = BigInt::from(c_hi);
    let num = [
        [s.clone(), BigInt::from(0), -f.x0().raw().clone()],
        [-f.slope().raw() * 2, &s * 2, -f.intercept().raw() * 2],
        [BigInt::from(0), BigInt::from(0), BigInt::from(1)],
    ];
    let den = [w.raw() * &ch, f.height().raw() * &ch, ch.clone()];
    let t = RationalMatrix::new(num, den)?;
    let normalized = t.scale_rows(
        [BigInt::from(2), BigInt::from(1), &ch * 2],
        [BigInt::from(1), BigInt::from(1), BigInt::from(c_hi - c_lo)],
    )?;
    // a = x0·c_mid + w·c_hi/2, b = m·a + q·c_mid, c = c_mid, over 2·S²
    let c_sum = BigInt::from(c_lo) + &ch;
    let a_num = f.x0().raw() * &c_sum + w.raw() * &ch;
    let point_center = (
        [
            &a_num * &s,
            f.slope().raw() * &a_num + f.intercept().raw() * &c_sum * &s,
            &c_sum * &s * &s,
        ],
        &s * &s * 2,
    );
    let center = [
        BigRational::new(1.into(), 2.into()),
        BigRational::from_integer(0.into()),
        BigRational::new(BigInt::from(c_lo) + &ch, &ch * 2),
    ];
    let half_widths = [0.5, 1.0, (c_hi - c_lo) as f64 / (2.0 * c_hi as f64)];
    Ok(LinearFormFrame {
        t,
        normalized,
        center,
        point_center,
        half_widths,
        flagstone_index,
        c_lo,
        c_hi,
    })
}

impl LinearFormFrame {
    pub fn matrix(&self) -> &RationalMatrix {
        &self.t
    }
    pub fn center(&self) -> &[BigRational; 3] {
        &self.center
    }
    /// The forms divided by the box half widths.
    pub fn normalized_matrix(&self) -> &RationalMatrix {
        &self.normalized
    }
    /// The integer-space point mapped to the box center, as numerators over
    /// a common denominator.
    pub fn point_center(&self) -> &([BigInt; 3], BigInt) {
        &self.point_center
    }
    pub fn half_widths(&self) -> [f64; 3] {
        self.half_widths
    }
    pub fn flagstone_index(&self) -> usize {
        self.flagstone_index
    }
    pub fn c_lo(&self) -> u64 {
        self.c_lo
    }
    pub fn c_hi(&self) -> u64 {
        self.c_hi
    }
    pub fn det(&self) -> BigRational {
        self.t.det()
    }

    /// The three form values at an integer point, exactly.
    pub fn forms_at(&self, v: [i64; 3]) -> [BigRational; 3] {
        self.t.apply(&v.map(BigInt::from))
    }

    /// True iff the integer point lies in the frame's box.
    pub fn box_contains(&self, v: [i64; 3]) -> bool {
        let l = self.forms_at(v);
        let hw = [
            BigRational::new(1.into(), 2.into()),
            BigRational::from_integer(1.into()),
            BigRational::new(BigInt::from(self.c_hi - self.c_lo), BigInt::from(2 * self.c_hi)),
        ];
        (0..3).all(|i| {
            let d = &l[i] - &self.center[i];
            d <= hw[i] && -d <= hw[i]
        })
    }
}

pub fn reduce_basis(frame: &LinearFormFrame) -> Result<ReducedBasis, LatticeError> {
    reduce_matrix(&frame.t)
}

/// Builds, reduces and enumerates the frame of one flagstone.
pub fn search_flagstone(
    plan: &CoveringPlan,
    index: usize,
    c_lo: u64,
    c_hi: u64,
    targets: &TargetSet,
) -> Result<FrameOutcome, LatticeError> {
    let run = || {
        let frame = build_frame(&plan.flagstones()[index], index, c_lo, c_hi)?;
        let rb = reduce_basis(&frame)?;
        let out = enumerate_frame(&frame, &rb, targets)?;
        let bound = enumerate::volume_bound(&frame, &rb);
        if out.inspected as f64 > bound {
            log::warn!(
                "flagstone {index}: inspected {} points, above the volume bound {bound:.1}",
                out.inspected
            );
        }
        Ok(out)
    };
    run().map_err(|e: LatticeError| e.in_flagstone(index))
}

/// Union of all frames of a plan over its denominator range, sorted and
/// deduplicated.
pub fn search_range(plan: &CoveringPlan, targets: &TargetSet) -> Result<Vec<Solution>, LatticeError> {
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let parts = (0..plan.len())
        .into_par_iter()
        .map(|i| search_flagstone(plan, i, plan.b_lo(), plan.b_hi(), targets).map(|o| o.solutions))
        .collect::<Result<Vec<_>, _>>()?;
    let mut all: Vec<Solution> = parts.into_iter().flatten().collect();
    all.sort();
    all.dedup();
    Ok(all)
}
