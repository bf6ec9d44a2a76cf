//! A 256-bit two's complement signed integer.
//!
//! Only the operations the search needs are provided: addition, subtraction,
//! negation, multiplication with overflow detection, ordering, small-modulus
//! remainders and decimal conversion. Cubes of 84-bit magnitudes and sums of
//! three of them fit comfortably.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

const LIMBS: usize = 4;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct I256 {
    // little endian
    limbs: [u64; LIMBS],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseI256Error {
    #[error("empty integer literal")]
    Empty,
    #[error("invalid digit in integer literal")]
    InvalidDigit,
    #[error("integer literal does not fit in 256 bits")]
    Overflow,
}

impl I256 {
    pub const ZERO: I256 = I256 { limbs: [0; LIMBS] };
    pub const ONE: I256 = I256 { limbs: [1, 0, 0, 0] };
    pub const MAX: I256 = I256 {
        limbs: [u64::MAX, u64::MAX, u64::MAX, u64::MAX >> 1],
    };
    pub const MIN: I256 = I256 {
        limbs: [0, 0, 0, 1 << 63],
    };

    pub const fn from_i128(v: i128) -> Self {
        let lo = v as u128;
        let ext = if v < 0 { u64::MAX } else { 0 };
        I256 {
            limbs: [lo as u64, (lo >> 64) as u64, ext, ext],
        }
    }

    pub fn is_negative(&self) -> bool {
        self.limbs[LIMBS - 1] >> 63 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.limbs == [0; LIMBS]
    }

    pub fn signum(&self) -> i32 {
        if self.is_negative() {
            -1
        } else if self.is_zero() {
            0
        } else {
            1
        }
    }

    pub fn wrapping_add(self, rhs: Self) -> Self {
        let mut out = [0u64; LIMBS];
        let mut carry = false;
        for (i, o) in out.iter_mut().enumerate() {
            let (s1, c1) = self.limbs[i].overflowing_add(rhs.limbs[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *o = s2;
            carry = c1 || c2;
        }
        I256 { limbs: out }
    }

    pub fn wrapping_neg(self) -> Self {
        let mut inv = self;
        for l in inv.limbs.iter_mut() {
            *l = !*l;
        }
        inv.wrapping_add(I256::ONE)
    }

    pub fn wrapping_sub(self, rhs: Self) -> Self {
        self.wrapping_add(rhs.wrapping_neg())
    }

    pub fn checked_add(self, rhs: Self) -> Option<Self> {
        let r = self.wrapping_add(rhs);
        if self.is_negative() == rhs.is_negative() && r.is_negative() != self.is_negative() {
            None
        } else {
            Some(r)
        }
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        let r = self.wrapping_sub(rhs);
        if self.is_negative() != rhs.is_negative() && r.is_negative() != self.is_negative() {
            None
        } else {
            Some(r)
        }
    }

    pub fn checked_neg(self) -> Option<Self> {
        if self == I256::MIN {
            None
        } else {
            Some(self.wrapping_neg())
        }
    }

    /// Magnitude as an unsigned little endian limb array. `MIN` maps to 2^255.
    fn magnitude(&self) -> [u64; LIMBS] {
        if self.is_negative() {
            self.wrapping_neg().limbs
        } else {
            self.limbs
        }
    }

    pub fn checked_mul(self, rhs: Self) -> Option<Self> {
        let negative = self.is_negative() != rhs.is_negative();
        let a = self.magnitude();
        let b = rhs.magnitude();
        let mut wide = [0u64; 2 * LIMBS];
        for i in 0..LIMBS {
            if a[i] == 0 {
                continue;
            }
            let mut carry: u128 = 0;
            for j in 0..LIMBS {
                let cur = wide[i + j] as u128 + (a[i] as u128) * (b[j] as u128) + carry;
                wide[i + j] = cur as u64;
                carry = cur >> 64;
            }
            let mut k = i + LIMBS;
            while carry != 0 {
                let cur = wide[k] as u128 + carry;
                wide[k] = cur as u64;
                carry = cur >> 64;
                k += 1;
            }
        }
        if wide[LIMBS..].iter().any(|&l| l != 0) {
            return None;
        }
        let mag = I256 {
            limbs: [wide[0], wide[1], wide[2], wide[3]],
        };
        if !mag.is_negative() {
            Some(if negative { mag.wrapping_neg() } else { mag })
        } else if negative && mag == I256::MIN {
            Some(I256::MIN)
        } else {
            None
        }
    }

    pub fn checked_pow3(self) -> Option<Self> {
        self.checked_mul(self)?.checked_mul(self)
    }

    pub fn to_i128(&self) -> Option<i128> {
        let ext = if self.is_negative() { u64::MAX } else { 0 };
        if self.limbs[2] != ext || self.limbs[3] != ext {
            return None;
        }
        let v = (self.limbs[0] as u128 | (self.limbs[1] as u128) << 64) as i128;
        if (v < 0) != self.is_negative() {
            return None;
        }
        Some(v)
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_i128().and_then(|v| i64::try_from(v).ok())
    }

    /// Nonnegative remainder modulo a small positive modulus.
    pub fn rem_euclid_u64(&self, modulus: u64) -> u64 {
        assert!(modulus > 0, "modulus must be positive");
        let (_, r) = divmod_small(self.magnitude(), modulus);
        if self.is_negative() && r != 0 {
            modulus - r
        } else {
            r
        }
    }
}

fn divmod_small(mut mag: [u64; LIMBS], d: u64) -> ([u64; LIMBS], u64) {
    let mut rem: u128 = 0;
    for l in mag.iter_mut().rev() {
        let cur = (rem << 64) | *l as u128;
        *l = (cur / d as u128) as u64;
        rem = cur % d as u128;
    }
    (mag, rem as u64)
}

impl From<i64> for I256 {
    fn from(v: i64) -> Self {
        I256::from_i128(v as i128)
    }
}

impl From<i128> for I256 {
    fn from(v: i128) -> Self {
        I256::from_i128(v)
    }
}

impl From<i32> for I256 {
    fn from(v: i32) -> Self {
        I256::from_i128(v as i128)
    }
}

impl From<u64> for I256 {
    fn from(v: u64) -> Self {
        I256::from_i128(v as i128)
    }
}

impl Ord for I256 {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.is_negative(), other.is_negative()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.limbs.iter().rev().cmp(other.limbs.iter().rev()),
        }
    }
}

impl PartialOrd for I256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for I256 {
    type Output = I256;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("attempt to add with overflow")
    }
}

impl Sub for I256 {
    type Output = I256;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("attempt to subtract with overflow")
    }
}

impl Mul for I256 {
    type Output = I256;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("attempt to multiply with overflow")
    }
}

impl Neg for I256 {
    type Output = I256;
    fn neg(self) -> Self {
        self.checked_neg().expect("attempt to negate with overflow")
    }
}

const TEN_19: u64 = 10_000_000_000_000_000_000;

impl fmt::Display for I256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut mag = self.magnitude();
        let mut chunks = Vec::new();
        loop {
            let (q, r) = divmod_small(mag, TEN_19);
            chunks.push(r);
            mag = q;
            if mag == [0; LIMBS] {
                break;
            }
        }
        let mut s = String::with_capacity(chunks.len() * 19);
        let mut iter = chunks.iter().rev();
        if let Some(first) = iter.next() {
            s.push_str(&first.to_string());
        }
        for c in iter {
            s.push_str(&format!("{c:019}"));
        }
        f.pad_integral(!self.is_negative(), "", &s)
    }
}

impl fmt::Debug for I256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I256({self})")
    }
}

impl FromStr for I256 {
    type Err = ParseI256Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (negative, digits) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        if digits.is_empty() {
            return Err(ParseI256Error::Empty);
        }
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseI256Error::InvalidDigit);
        }
        // accumulate the magnitude as a negative number so that MIN parses
        let ten = I256::from(10i64);
        let mut acc = I256::ZERO;
        for b in digits.bytes() {
            let d = I256::from((b - b'0') as i64);
            acc = acc
                .checked_mul(ten)
                .and_then(|v| v.checked_sub(d))
                .ok_or(ParseI256Error::Overflow)?;
        }
        if negative {
            Ok(acc)
        } else {
            acc.checked_neg().ok_or(ParseI256Error::Overflow)
        }
    }
}
