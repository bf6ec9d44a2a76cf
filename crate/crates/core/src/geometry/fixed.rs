//! Fixed-point dyadic reals with 128 fractional bits.
//!
//! Tile constants live on this grid. Every value is an exact rational, so a
//! strip described by (x0, x1, m, q, h) is an exact geometric object and all
//! rounding happens in an explicit direction when the constants are made.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const FRAC_BITS: u32 = 128;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fix(BigInt);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed decimal literal: {0}")]
pub struct ParseFixError(pub String);

pub(crate) fn div_floor(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

pub(crate) fn div_ceil(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

/// Multiplies by 2^e without intermediate overflow or underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// num / den as the nearest-ish f64 (relative error below 2^-60 before the
/// final rounding). `den` must be positive.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    debug_assert!(den.is_positive());
    if num.is_zero() {
        return 0.0;
    }
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num.abs() << shift as usize) / den
    } else {
        num.abs() / (den << (-shift) as usize)
    };
    let v = ldexp(q.to_f64().unwrap_or(f64::INFINITY), -shift);
    if num.is_negative() {
        -v
    } else {
        v
    }
}

fn floor_cbrt(n: &BigInt) -> BigInt {
    debug_assert!(!n.is_negative());
    n.cbrt()
}

impl Fix {
    pub fn from_raw(raw: BigInt) -> Self {
        Fix(raw)
    }

    pub fn raw(&self) -> &BigInt {
        &self.0
    }

    pub fn zero() -> Self {
        Fix(BigInt::zero())
    }

    pub fn one() -> Self {
        Fix(BigInt::one() << FRAC_BITS)
    }

    pub fn ulp() -> Self {
        Fix(BigInt::one())
    }

    pub fn from_int(v: i64) -> Self {
        Fix(BigInt::from(v) << FRAC_BITS)
    }

    pub fn scale() -> BigInt {
        BigInt::one() << FRAC_BITS
    }

    pub fn from_ratio_floor(num: &BigInt, den: &BigInt) -> Self {
        Fix(div_floor(&(num << FRAC_BITS), den))
    }

    pub fn from_ratio_ceil(num: &BigInt, den: &BigInt) -> Self {
        Fix(div_ceil(&(num << FRAC_BITS), den))
    }

    fn from_f64_with(v: f64, round_up: bool) -> Self {
        assert!(v.is_finite(), "non-finite value {v}");
        if v == 0.0 {
            return Fix::zero();
        }
        let bits = v.abs().to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let mut m = BigInt::from(mant);
        if v < 0.0 {
            m = -m;
        }
        let e = exp + FRAC_BITS as i64;
        if e >= 0 {
            Fix(m << e as usize)
        } else {
            let d = BigInt::one() << (-e) as usize;
            if round_up {
                Fix(div_ceil(&m, &d))
            } else {
                Fix(div_floor(&m, &d))
            }
        }
    }

    pub fn from_f64_floor(v: f64) -> Self {
        Fix::from_f64_with(v, false)
    }

    pub fn from_f64_ceil(v: f64) -> Self {
        Fix::from_f64_with(v, true)
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.0, &Fix::scale())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn mul_floor(&self, other: &Fix) -> Fix {
        Fix((&self.0 * &other.0) >> FRAC_BITS)
    }

    pub fn mul_ceil(&self, other: &Fix) -> Fix {
        Fix(div_ceil(&(&self.0 * &other.0), &Fix::scale()))
    }

    pub fn mul_int(&self, k: i64) -> Fix {
        Fix(&self.0 * k)
    }

    pub fn div_int_floor(&self, k: i64) -> Fix {
        Fix(div_floor(&self.0, &BigInt::from(k)))
    }

    pub fn div_int_ceil(&self, k: i64) -> Fix {
        Fix(div_ceil(&self.0, &BigInt::from(k)))
    }

    /// Largest grid value whose cube does not exceed `self` (which must be
    /// nonnegative).
    pub fn cbrt_floor(&self) -> Fix {
        assert!(!self.is_negative(), "cube root of a negative value");
        Fix(floor_cbrt(&(&self.0 << (2 * FRAC_BITS))))
    }

    pub fn cbrt_ceil(&self) -> Fix {
        let radicand = &self.0 << (2 * FRAC_BITS);
        let r = Fix(floor_cbrt(&radicand));
        if &r.0 * &r.0 * &r.0 == radicand {
            r
        } else {
            Fix(r.0 + 1)
        }
    }

    pub fn min(self, other: Fix) -> Fix {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Fix) -> Fix {
        std::cmp::max(self, other)
    }

    /// Exact decimal expansion (every dyadic value has a finite one).
    pub fn to_decimal(&self) -> String {
        let mag = self.0.abs();
        let int_part = &mag >> FRAC_BITS;
        let frac = &mag - (&int_part << FRAC_BITS);
        let mut s = String::new();
        if self.0.is_negative() {
            s.push('-');
        }
        s.push_str(&int_part.to_string());
        if !frac.is_zero() {
            let digits = (frac * BigInt::from(5u32).pow(FRAC_BITS)).to_string();
            let padded = format!("{:0>width$}", digits, width = FRAC_BITS as usize);
            s.push('.');
            s.push_str(padded.trim_end_matches('0'));
        }
        s
    }

    /// Parses a decimal literal, rounding to the nearest grid value.
    pub fn parse_decimal(text: &str) -> Result<Fix, ParseFixError> {
        let err = || ParseFixError(text.to_string());
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (int_s, frac_s) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_s.is_empty() || !int_s.bytes().chain(frac_s.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits: BigInt = format!("{int_s}{frac_s}").parse().map_err(|_| err())?;
        let den = BigInt::from(10u32).pow(frac_s.len() as u32);
        // nearest: floor((2·n·2^P + den) / (2·den))
        let num = (digits << (FRAC_BITS + 1)) + &den;
        let raw = div_floor(&num, &(den * 2));
        Ok(Fix(if negative { -raw } else { raw }))
    }
}

impl fmt::Debug for Fix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fix({:.17e})", self.to_f64())
    }
}

impl Add for &Fix {
    type Output = Fix;
    fn add(self, rhs: &Fix) -> Fix {
        Fix(&self.0 + &rhs.0)
    }
}

impl Sub for &Fix {
    type Output = Fix;
    fn sub(self, rhs: &Fix) -> Fix {
        Fix(&self.0 - &rhs.0)
    }
}

impl Add for Fix {
    type Output = Fix;
    fn add(self, rhs: Fix) -> Fix {
        Fix(self.0 + rhs.0)
    }
}

impl Sub for Fix {
    type Output = Fix;
    fn sub(self, rhs: Fix) -> Fix {
        Fix(self.0 - rhs.0)
    }
}

impl Neg for Fix {
    type Output = Fix;
    fn neg(self) -> Fix {
        Fix(-self.0)
    }
}
