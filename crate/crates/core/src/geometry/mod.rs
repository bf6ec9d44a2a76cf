//! Geometry of the normalized Fermat cubic Y³ = 1 − X³ on 0 ≤ X ≤ 2^(-1/3),
//! and the flagstone covering of that arc.
//!
//! A flagstone is a parallelogram with two vertical sides at `x0` and `x1`
//! and two sides parallel to the tangent at `x0`. Its height is chosen so
//! that every rational point (a/c, b/c) with |a³ + b³ − c³| ≤ k_max and
//! c ≥ B_lo whose abscissa lies in [x0, x1] falls inside the strip.

mod fixed;

pub use fixed::{ratio_to_f64, Fix, ParseFixError, FRAC_BITS};

use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed};

/// 2^(-1/3), where the arc meets the symmetry line X = Y.
pub const SYMMETRY_X: f64 = 0.793_700_525_984_099_737_375_852_819_636_154;

const DOMAIN_TOLERANCE: f64 = 1e-12;

/// Tiles never extend past this abscissa; beyond it the curve height drops
/// below 0.65 and the rounding bounds used for tile constants no longer hold.
pub const MAX_TILE_X: f64 = 0.9;

pub const MIN_TILE_WIDTH: f64 = 1e-12;
pub const MAX_TILE_WIDTH: f64 = 1e-2;
pub const DEFAULT_MARGIN: f64 = 2.0;
pub const MAX_TILES: usize = 8_000_000;

/// Grid units added to every half height to absorb the rounding of y0, m and q.
const ROUNDING_SLACK_ULPS: i64 = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("abscissa {0} outside the curve domain")]
    Domain(f64),
    #[error("invalid arc [{lo}, {hi}]")]
    InvalidArc { lo: f64, hi: f64 },
    #[error("invalid covering parameters: {0}")]
    InvalidRange(String),
    #[error("covering would need more than {MAX_TILES} flagstones")]
    TooManyTiles,
    #[error("malformed covering manifest at line {line}: {reason}")]
    Manifest { line: usize, reason: String },
}

fn check_domain(x: f64) -> Result<(), GeometryError> {
    if x.is_finite() && (0.0..=SYMMETRY_X + DOMAIN_TOLERANCE).contains(&x) {
        Ok(())
    } else {
        Err(GeometryError::Domain(x))
    }
}

// (1 − X³)^(1/3) without domain checks; valid on [0, 1].
fn fermat_y(x: f64) -> f64 {
    (1.0 - x * x * x).cbrt()
}

pub fn curve_y(x: f64) -> Result<f64, GeometryError> {
    check_domain(x)?;
    Ok(fermat_y(x))
}

/// Slope −X²/Y² of the curve.
pub fn curve_dy(x: f64) -> Result<f64, GeometryError> {
    let y = curve_y(x)?;
    Ok(-(x * x) / (y * y))
}

/// Second derivative −2X/Y⁵.
pub fn curve_d2y(x: f64) -> Result<f64, GeometryError> {
    let y = curve_y(x)?;
    Ok(-2.0 * x / y.powi(5))
}

/// Exact enclosure of Y(x) on the fixed-point grid: `lo ≤ Y(x) ≤ hi` with
/// `hi − lo` at most one grid unit.
pub fn curve_y_bounds(x: &Fix) -> Result<(Fix, Fix), GeometryError> {
    if x.is_negative() || *x > Fix::one() {
        return Err(GeometryError::Domain(x.to_f64()));
    }
    let radicand = BigInt::one() << (3 * FRAC_BITS);
    let radicand = radicand - x.raw() * x.raw() * x.raw();
    // radicand is Y³ scaled by 2^(3P); its integer cube root is Y scaled by 2^P
    let lo = Fix::from_raw(radicand.cbrt());
    let hi = if lo.raw() * lo.raw() * lo.raw() == radicand {
        lo.clone()
    } else {
        Fix::from_raw(lo.raw() + 1)
    };
    Ok((lo, hi))
}

/// Smallest grid value not below 2^(-1/3).
pub fn symmetry_point() -> &'static Fix {
    static SYM: OnceLock<Fix> = OnceLock::new();
    SYM.get_or_init(|| Fix::from_f64_floor(0.5).cbrt_ceil())
}

fn max_tile_x() -> &'static Fix {
    static MAX_X: OnceLock<Fix> = OnceLock::new();
    MAX_X.get_or_init(|| Fix::from_f64_floor(MAX_TILE_X))
}

/// Sub-arc [x_lo, x_hi] of the reduced range [0, 2^(-1/3)].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    x_lo: Fix,
    x_hi: Fix,
}

impl Arc {
    pub fn new(x_lo: Fix, x_hi: Fix) -> Result<Self, GeometryError> {
        if x_lo.is_negative() || x_lo >= x_hi || x_hi > *symmetry_point() {
            return Err(GeometryError::InvalidArc {
                lo: x_lo.to_f64(),
                hi: x_hi.to_f64(),
            });
        }
        Ok(Arc { x_lo, x_hi })
    }

    pub fn full() -> Self {
        Arc {
            x_lo: Fix::zero(),
            x_hi: symmetry_point().clone(),
        }
    }

    /// The arc [center − half_width, center + half_width] clipped to the
    /// reduced range.
    pub fn around(center: &Fix, half_width: &Fix) -> Result<Self, GeometryError> {
        let lo = (center - half_width).max(Fix::zero());
        let hi = (center + half_width).min(symmetry_point().clone());
        Arc::new(lo, hi)
    }

    pub fn x_lo(&self) -> &Fix {
        &self.x_lo
    }

    pub fn x_hi(&self) -> &Fix {
        &self.x_hi
    }

    pub fn reaches_symmetry_point(&self) -> bool {
        self.x_hi == *symmetry_point()
    }
}

/// Inputs that set the thickness of a strip.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripParams {
    pub k_max: u64,
    pub b_lo: u64,
    pub margin: f64,
}

impl StripParams {
    /// Largest relative perturbation |k|/c³ of a point off the curve.
    pub fn delta(&self) -> f64 {
        self.k_max as f64 / (self.b_lo as f64).powi(3)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flagstone {
    x0: Fix,
    x1: Fix,
    y0: Fix,
    m: Fix,
    q: Fix,
    h: Fix,
}

impl Flagstone {
    /// Builds the strip over [x0, x1] with the tangent taken at x0.
    ///
    /// Half height = margin · (sag + k_term) + rounding slack, where `sag`
    /// bounds the curve's distance from its tangent (|Y''| is largest at x1)
    /// and `k_term` bounds how far Y moves when Y³ is perturbed by k_max/B_lo³.
    /// `k_term` uses the exact cube-root difference at the lowest point of the
    /// tile rather than its linearization, which underestimates downward moves.
    pub fn build(x0: Fix, x1: Fix, params: &StripParams) -> Result<Self, GeometryError> {
        if x0.is_negative() || x0 >= x1 || x1 > *max_tile_x() {
            return Err(GeometryError::InvalidArc {
                lo: x0.to_f64(),
                hi: x1.to_f64(),
            });
        }
        if !(params.margin.is_finite() && params.margin > 0.0) || params.b_lo == 0 {
            return Err(GeometryError::InvalidRange(format!("{params:?}")));
        }
        let (y0, _) = curve_y_bounds(&x0)?;
        let scale = Fix::scale();
        let m = Fix::from_raw(-fixed::div_floor(
            &(x0.raw() * x0.raw() * &scale),
            &(y0.raw() * y0.raw()),
        ));
        let q = &y0 - &m.mul_floor(&x0);

        const FUDGE: f64 = 1e-12;
        let x1f = (x1.to_f64() * (1.0 + FUDGE)).min(1.0);
        let y1_low = fermat_y(x1f) * (1.0 - FUDGE);
        let w = (&x1 - &x0).to_f64() * (1.0 + FUDGE);
        let curvature = 2.0 * x1f / y1_low.powi(5);
        let sag = curvature * w * w / 2.0;

        let delta = params.delta() * (1.0 + FUDGE);
        let base = y1_low * y1_low * y1_low - delta;
        let k_term = if base > 0.0 {
            let z = base.cbrt();
            delta / (y1_low * y1_low + y1_low * z + z * z) * (1.0 + 1e-9)
        } else {
            delta.cbrt().max(1.0) * (1.0 + FUDGE)
        };

        let half = params.margin * (sag + k_term);
        let half = Fix::from_f64_ceil(half) + Fix::from_raw(BigInt::from(ROUNDING_SLACK_ULPS));
        let h = half.mul_int(2);
        Ok(Flagstone { x0, x1, y0, m, q, h })
    }

    /// Reassembles a flagstone from stored constants; `y0` is recomputed.
    pub fn from_parts(x0: Fix, x1: Fix, m: Fix, q: Fix, h: Fix) -> Result<Self, GeometryError> {
        if x0.is_negative() || x0 >= x1 || !h.raw().is_positive() {
            return Err(GeometryError::InvalidArc {
                lo: x0.to_f64(),
                hi: x1.to_f64(),
            });
        }
        let (y0, _) = curve_y_bounds(&x0)?;
        Ok(Flagstone { x0, x1, y0, m, q, h })
    }

    pub fn x0(&self) -> &Fix {
        &self.x0
    }
    pub fn x1(&self) -> &Fix {
        &self.x1
    }
    pub fn y0(&self) -> &Fix {
        &self.y0
    }
    pub fn slope(&self) -> &Fix {
        &self.m
    }
    pub fn intercept(&self) -> &Fix {
        &self.q
    }
    /// Full strip thickness measured along Y.
    pub fn height(&self) -> &Fix {
        &self.h
    }

    pub fn half_height(&self) -> Fix {
        self.h.div_int_ceil(2)
    }

    pub fn width(&self) -> Fix {
        &self.x1 - &self.x0
    }

    /// The strip line m·X + q evaluated in f64.
    pub fn line_at(&self, x: f64) -> f64 {
        self.m.to_f64() * x + self.q.to_f64()
    }

    /// Checks |Y(X) − (m·X + q)| ≤ h/2 exactly at `samples` evenly spaced grid
    /// abscissae of [x0, x1]. Returns the first failing abscissa.
    pub fn check_containment(&self, samples: usize) -> Result<(), Fix> {
        let samples = samples.max(2);
        let w = self.width();
        let p = FRAC_BITS as usize;
        let one6 = BigInt::one() << (6 * p);
        let half = self.half_height().raw() << p;
        let q = self.q.raw() << p;
        for j in 0..samples {
            let x = if j + 1 == samples {
                self.x1.clone()
            } else {
                &self.x0 + &Fix::from_raw(fixed::div_floor(&(w.raw() * j), &BigInt::from(samples - 1)))
            };
            if x.is_negative() || x > Fix::one() {
                return Err(x);
            }
            // at scale 2^(2P) the line needs no rounding; cubing is monotone,
            // so bottom ≤ Y ≤ top iff bottom³ ≤ Y³ ≤ top³, all at scale 2^(6P)
            let line = self.m.raw() * x.raw() + &q;
            let top = &line + &half;
            let bottom = &line - &half;
            let y3 = &one6 - ((x.raw() * x.raw() * x.raw()) << (3 * p));
            if &top * &top * &top < y3 || &bottom * &bottom * &bottom > y3 {
                return Err(x);
            }
        }
        Ok(())
    }
}

/// Gap-free covering of an arc by flagstones, for one denominator range.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringPlan {
    flagstones: Vec<Flagstone>,
    b_lo: u64,
    b_hi: u64,
    k_max: u64,
    margin: f64,
}

/// Upper abscissa a point with a ≤ b can reach: ((1 + k_max/B_lo³)/2)^(1/3).
fn reach_point(k_max: u64, b_lo: u64) -> Fix {
    let b3 = BigInt::from(b_lo).pow(3);
    let half_sum = Fix::from_ratio_ceil(&(&b3 + k_max), &(b3 * 2));
    half_sum.cbrt_ceil()
}

fn balanced_width(x0: f64, params: &StripParams) -> f64 {
    let y = fermat_y(x0.min(MAX_TILE_X));
    let k_term = params.delta() / (3.0 * y * y);
    let mut w = MAX_TILE_WIDTH;
    for _ in 0..40 {
        let x1 = (x0 + w).min(MAX_TILE_X);
        let curvature = 2.0 * x1 / fermat_y(x1).powi(5);
        let target = (2.0 * k_term / curvature.max(1e-300)).sqrt();
        w = (w * target).sqrt().clamp(MIN_TILE_WIDTH, MAX_TILE_WIDTH);
    }
    w
}

/// Covers `arc` with flagstones sized for denominators in [b_lo, b_hi] and
/// targets up to k_max.
///
/// Widths balance the curvature sag against the k-perturbation term and are
/// clamped to [1e-12, 1e-2]. A full arc is extended slightly past 2^(-1/3)
/// to the reach point, since points with a ≤ b can sit just beyond it when
/// a³ + b³ − c³ > 0. Denominators c ≤ √k_max are rejected: there the
/// perturbation is not small and such solutions are found by direct scan.
pub fn make_covering(
    arc: &Arc,
    b_lo: u64,
    b_hi: u64,
    k_max: u64,
    margin: f64,
) -> Result<CoveringPlan, GeometryError> {
    if b_lo == 0 || b_lo >= b_hi {
        return Err(GeometryError::InvalidRange(format!(
            "denominator range [{b_lo}, {b_hi}] must satisfy 1 <= B_lo < B_hi"
        )));
    }
    if k_max == 0 {
        return Err(GeometryError::InvalidRange("k_max must be positive".into()));
    }
    if !(margin.is_finite() && margin >= 1.0) {
        return Err(GeometryError::InvalidRange(format!("margin {margin} must be >= 1")));
    }
    if (b_lo as u128) * (b_lo as u128) <= k_max as u128 {
        return Err(GeometryError::InvalidRange(format!(
            "B_lo = {b_lo} must exceed sqrt(k_max = {k_max})"
        )));
    }
    let params = StripParams {
        k_max,
        b_lo,
        margin,
    };
    let end = if arc.reaches_symmetry_point() {
        arc.x_hi.clone().max(reach_point(k_max, b_lo))
    } else {
        arc.x_hi.clone()
    };
    let mut flagstones = Vec::new();
    let mut x = arc.x_lo.clone();
    while x < end {
        if flagstones.len() >= MAX_TILES {
            return Err(GeometryError::TooManyTiles);
        }
        let w = Fix::from_f64_floor(balanced_width(x.to_f64(), &params)).max(Fix::ulp());
        let x1 = (&x + &w).min(end.clone());
        let tile = Flagstone::build(x.clone(), x1.clone(), &params)?;
        flagstones.push(tile);
        x = x1;
    }
    Ok(CoveringPlan {
        flagstones,
        b_lo,
        b_hi,
        k_max,
        margin,
    })
}

impl CoveringPlan {
    /// A plan with explicitly given tiles, for purpose-built searches.
    pub fn from_flagstones(
        flagstones: Vec<Flagstone>,
        b_lo: u64,
        b_hi: u64,
        k_max: u64,
        margin: f64,
    ) -> Result<Self, GeometryError> {
        if b_lo == 0 || b_lo >= b_hi {
            return Err(GeometryError::InvalidRange(format!("[{b_lo}, {b_hi}]")));
        }
        if flagstones.windows(2).any(|w| w[0].x1 != w[1].x0) {
            return Err(GeometryError::InvalidRange("flagstones do not chain".into()));
        }
        Ok(CoveringPlan {
            flagstones,
            b_lo,
            b_hi,
            k_max,
            margin,
        })
    }

    pub fn flagstones(&self) -> &[Flagstone] {
        &self.flagstones
    }
    pub fn len(&self) -> usize {
        self.flagstones.len()
    }
    pub fn is_empty(&self) -> bool {
        self.flagstones.is_empty()
    }
    pub fn b_lo(&self) -> u64 {
        self.b_lo
    }
    pub fn b_hi(&self) -> u64 {
        self.b_hi
    }
    pub fn k_max(&self) -> u64 {
        self.k_max
    }
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Index of the flagstone with x0 ≤ num/den < x1, if any.
    pub fn locate(&self, num: i64, den: i64) -> Option<usize> {
        assert!(den > 0);
        // x0 ≤ floor(v) ≤ v, and grid values above floor(v) exceed v
        let target = Fix::from_ratio_floor(&BigInt::from(num), &BigInt::from(den));
        let idx = self.flagstones.partition_point(|f| f.x0 <= target);
        if idx == 0 {
            return None;
        }
        let f = &self.flagstones[idx - 1];
        if target < f.x1 {
            Some(idx - 1)
        } else {
            None
        }
    }

    /// Copy with every strip height multiplied by `factor`. Used to inject
    /// faults when testing that coverage gaps are detected.
    #[doc(hidden)]
    pub fn with_scaled_heights(&self, factor: f64) -> CoveringPlan {
        let f = Fix::from_f64_floor(factor);
        let mut out = self.clone();
        for tile in &mut out.flagstones {
            let h = tile.h.mul_floor(&f);
            tile.h = if h.raw().is_positive() { h } else { Fix::from_int(0) + Fix::ulp() };
        }
        out
    }

    /// Line-oriented text form: a header, then `index x0 x1 m q h` per tile.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# threecubes covering manifest v1").unwrap();
        writeln!(
            s,
            "# b_lo {} b_hi {} k_max {} margin {:?} tiles {}",
            self.b_lo,
            self.b_hi,
            self.k_max,
            self.margin,
            self.flagstones.len()
        )
        .unwrap();
        for (i, f) in self.flagstones.iter().enumerate() {
            writeln!(
                s,
                "{i} {} {} {} {} {}",
                f.x0.to_decimal(),
                f.x1.to_decimal(),
                f.m.to_decimal(),
                f.q.to_decimal(),
                f.h.to_decimal()
            )
            .unwrap();
        }
        s
    }

    pub fn from_manifest(text: &str) -> Result<CoveringPlan, GeometryError> {
        let bad = |line: usize, reason: &str| GeometryError::Manifest {
            line,
            reason: reason.to_string(),
        };
        let mut header = None;
        let mut flagstones = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let n = n + 1;
            if let Some(rest) = line.strip_prefix("# b_lo ") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 9 {
                    return Err(bad(n, "header"));
                }
                let b_lo: u64 = f[0].parse().map_err(|_| bad(n, "b_lo"))?;
                let b_hi: u64 = f[2].parse().map_err(|_| bad(n, "b_hi"))?;
                let k_max: u64 = f[4].parse().map_err(|_| bad(n, "k_max"))?;
                let margin: f64 = f[6].parse().map_err(|_| bad(n, "margin"))?;
                header = Some((b_lo, b_hi, k_max, margin));
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 6 {
                return Err(bad(n, "expected 6 fields"));
            }
            let idx: usize = f[0].parse().map_err(|_| bad(n, "index"))?;
            if idx != flagstones.len() {
                return Err(bad(n, "index out of sequence"));
            }
            let p = |s: &str| Fix::parse_decimal(s).map_err(|e| bad(n, &e.to_string()));
            let tile = Flagstone::from_parts(p(f[1])?, p(f[2])?, p(f[3])?, p(f[4])?, p(f[5])?)
                .map_err(|e| bad(n, &e.to_string()))?;
            flagstones.push(tile);
        }
        let (b_lo, b_hi, k_max, margin) = header.ok_or_else(|| bad(0, "missing header"))?;
        CoveringPlan::from_flagstones(flagstones, b_lo, b_hi, k_max, margin)
    }
}
