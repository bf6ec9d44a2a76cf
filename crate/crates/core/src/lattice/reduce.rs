//! Exact LLL reduction of three-dimensional lattices given by rational bases.
//!
//! The basis matrix is scaled to an integer matrix by the least common
//! multiple of its row denominators (a uniform scaling, so reducedness is
//! unaffected) and reduced with the all-integer variant of LLL. All
//! Gram–Schmidt data are exact rationals until they are handed to the
//! enumerator as doubles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::LatticeError;
use crate::geometry::ratio_to_f64;

/// Lovász parameter used by the reduction, as p/q.
pub const REDUCTION_DELTA: (i64, i64) = (995, 1000);

/// Lovász parameter guaranteed to callers.
pub const GUARANTEED_DELTA: (i64, i64) = (99, 100);

const MAX_SWAPS: usize = 100_000;

/// A 3×3 real matrix with exact rational entries, stored row-wise as integer
/// numerators over one positive denominator per row. Lattice basis vectors
/// are its columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    num: [[BigInt; 3]; 3],
    den: [BigInt; 3],
}

pub type Unimodular = [[i128; 3]; 3];

pub const IDENTITY: Unimodular = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

fn det3<T>(m: &[[T; 3]; 3]) -> T
where
    T: Clone + std::ops::Mul<Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
{
    let e = |r: usize, c: usize| m[r][c].clone();
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

/// Inverse of a nonsingular rational 3×3 matrix via the adjugate.
pub fn invert3(m: &[[BigRational; 3]; 3]) -> Option<[[BigRational; 3]; 3]> {
    let det = det3(m);
    if det.is_zero() {
        return None;
    }
    let c = |r: usize, k: usize| m[r % 3][k % 3].clone();
    let mut inv: [[BigRational; 3]; 3] = Default::default();
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            // cofactor of (j, i)
            let cof = c(j + 1, i + 1) * c(j + 2, i + 2) - c(j + 1, i + 2) * c(j + 2, i + 1);
            *out = cof / det.clone();
        }
    }
    Some(inv)
}

pub fn mat_vec(m: &[[BigRational; 3]; 3], v: &[BigRational; 3]) -> [BigRational; 3] {
    std::array::from_fn(|r| (0..3).map(|k| &m[r][k] * &v[k]).fold(BigRational::zero(), |a, b| a + b))
}

impl RationalMatrix {
    pub fn new(num: [[BigInt; 3]; 3], den: [BigInt; 3]) -> Result<Self, LatticeError> {
        if den.iter().any(|d| !d.is_positive()) {
            return Err(LatticeError::Degenerate("row denominators must be positive".into()));
        }
        let m = RationalMatrix { num, den };
        if det3(&m.num).is_zero() {
            return Err(LatticeError::Degenerate("singular frame matrix".into()));
        }
        Ok(m)
    }

    pub fn from_i64(num: [[i64; 3]; 3], den: [i64; 3]) -> Result<Self, LatticeError> {
        RationalMatrix::new(num.map(|r| r.map(BigInt::from)), den.map(BigInt::from))
    }

    pub fn numerators(&self) -> &[[BigInt; 3]; 3] {
        &self.num
    }

    pub fn denominators(&self) -> &[BigInt; 3] {
        &self.den
    }

    pub fn entry(&self, r: usize, c: usize) -> BigRational {
        BigRational::new(self.num[r][c].clone(), self.den[r].clone())
    }

    pub fn to_rational(&self) -> [[BigRational; 3]; 3] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.entry(r, c)))
    }

    pub fn to_f64(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|r| std::array::from_fn(|c| ratio_to_f64(&self.num[r][c], &self.den[r])))
    }

    pub fn det(&self) -> BigRational {
        let d = &self.den[0] * &self.den[1] * &self.den[2];
        BigRational::new(det3(&self.num), d)
    }

    /// Image T·v of an integer vector, exactly.
    pub fn apply(&self, v: &[BigInt; 3]) -> [BigRational; 3] {
        std::array::from_fn(|r| {
            let n: BigInt = (0..3).map(|k| &self.num[r][k] * &v[k]).sum();
            BigRational::new(n, self.den[r].clone())
        })
    }

    /// T·U, whose columns are the images of the columns of U.
    pub fn mul_unimodular(&self, u: &Unimodular) -> RationalMatrix {
        let num = std::array::from_fn(|r| {
            std::array::from_fn(|j| (0..3).map(|k| &self.num[r][k] * BigInt::from(u[k][j])).sum())
        });
        RationalMatrix {
            num,
            den: self.den.clone(),
        }
    }

    /// (L·T, L) with L the least common multiple of the row denominators.
    pub fn integer_scaled(&self) -> ([[BigInt; 3]; 3], BigInt) {
        let l = self.den.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
        let m = std::array::from_fn(|r| {
            let f = &l / &self.den[r];
            std::array::from_fn(|c| &self.num[r][c] * &f)
        });
        (m, l)
    }
}

/// Result of reducing T·Z³: the transform U, the reduced vectors T·U (as
/// columns, in doubles) and their Gram–Schmidt data derived from the exact
/// integer reduction.
#[derive(Clone, Debug)]
pub struct ReducedBasis {
    pub u: Unimodular,
    /// `vectors[j]` is the j-th reduced basis vector.
    pub vectors: [[f64; 3]; 3],
    /// Squared Gram–Schmidt norms ‖b*_j‖².
    pub gs_norms2: [f64; 3],
    /// `mu[i][j]` = ⟨b_i, b*_j⟩/‖b*_j‖² for j < i.
    pub mu: [[f64; 3]; 3],
}

impl ReducedBasis {
    pub fn coefficient_vector(&self, j: usize) -> [i128; 3] {
        [self.u[0][j], self.u[1][j], self.u[2][j]]
    }

    pub fn norms(&self) -> [f64; 3] {
        self.vectors.map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

fn dot(a: &[BigInt; 3], b: &[BigInt; 3]) -> BigInt {
    (0..3).map(|i| &a[i] * &b[i]).sum()
}

/// Nearest integer to n/d (d > 0), ties away from zero.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two_n: BigInt = n * 2;
    if n.is_negative() {
        -((-two_n + d).div_floor(&(d * 2)))
    } else {
        (two_n + d).div_floor(&(d * 2))
    }
}

struct IntegralLll {
    b: [[BigInt; 3]; 3],
    h: [[BigInt; 3]; 3],
    // d[0] = 1, d[i] = Gram determinant of the first i vectors
    d: [BigInt; 4],
    // lam[k][j] for j < k, zero-based
    lam: [[BigInt; 3]; 3],
}

impl IntegralLll {
    fn new(cols: [[BigInt; 3]; 3]) -> Self {
        let h = std::array::from_fn(|j| std::array::from_fn(|k| BigInt::from((j == k) as i32)));
        IntegralLll {
            b: cols,
            h,
            d: [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::zero()],
            lam: Default::default(),
        }
    }

    // Gram–Schmidt row k (zero-based), from the already known rows below it.
    fn incorporate(&mut self, k: usize) -> Result<(), LatticeError> {
        for j in 0..=k {
            let mut u = dot(&self.b[k], &self.b[j]);
            for i in 0..j {
                u = (&self.d[i + 1] * u - &self.lam[k][i] * &self.lam[j][i]) / &self.d[i];
            }
            if j < k {
                self.lam[k][j] = u;
            } else {
                if u.is_zero() {
                    return Err(LatticeError::Degenerate("linearly dependent basis".into()));
                }
                self.d[k + 1] = u;
            }
        }
        Ok(())
    }

    fn redi(&mut self, k: usize, l: usize) {
        let dl = &self.d[l + 1];
        let twice: BigInt = &self.lam[k][l] * 2;
        if twice.abs() <= *dl {
            return;
        }
        let q = round_div(&self.lam[k][l], dl);
        for i in 0..3 {
            let t = &q * &self.b[l][i];
            self.b[k][i] -= t;
            let t = &q * &self.h[l][i];
            self.h[k][i] -= t;
        }
        let t = &q * &self.d[l + 1];
        self.lam[k][l] -= t;
        for i in 0..l {
            let t = &q * &self.lam[l][i];
            self.lam[k][i] -= t;
        }
    }

    fn swapi(&mut self, k: usize, kmax: usize) {
        self.b.swap(k, k - 1);
        self.h.swap(k, k - 1);
        for j in 0..k.saturating_sub(1) {
            let t = self.lam[k][j].clone();
            self.lam[k][j] = std::mem::replace(&mut self.lam[k - 1][j], t);
        }
        let lam = self.lam[k][k - 1].clone();
        let bnew = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..=kmax {
            let t = self.lam[i][k].clone();
            self.lam[i][k] = (&self.d[k + 1] * &self.lam[i][k - 1] - &lam * &t) / &self.d[k];
            self.lam[i][k - 1] = (&bnew * &t + &lam * &self.lam[i][k]) / &self.d[k + 1];
        }
        self.d[k] = bnew;
    }

    fn run(&mut self) -> Result<(), LatticeError> {
        let (p, q) = REDUCTION_DELTA;
        let (p, q) = (BigInt::from(p), BigInt::from(q));
        self.incorporate(0)?;
        let mut kmax = 0;
        let mut k = 1;
        let mut swaps = 0;
        while k < 3 {
            if k > kmax {
                kmax = k;
                self.incorporate(k)?;
            }
            self.redi(k, k - 1);
            let lhs = &q * &self.d[k + 1] * &self.d[k - 1];
            let rhs = &p * &self.d[k] * &self.d[k] - &q * &self.lam[k][k - 1] * &self.lam[k][k - 1];
            if lhs < rhs {
                swaps += 1;
                if swaps > MAX_SWAPS {
                    return Err(LatticeError::NumericalFailure(format!(
                        "reduction did not converge after {MAX_SWAPS} swaps"
                    )));
                }
                self.swapi(k, kmax);
                k = (k - 1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    self.redi(k, l);
                }
                k += 1;
            }
        }
        Ok(())
    }
}

/// LLL-reduces the lattice spanned by the columns of `t`.
pub fn reduce_matrix(t: &RationalMatrix) -> Result<ReducedBasis, LatticeError> {
    let (g, l) = t.integer_scaled();
    let cols: [[BigInt; 3]; 3] = std::array::from_fn(|j| std::array::from_fn(|r| g[r][j].clone()));
    let mut lll = IntegralLll::new(cols);
    lll.run()?;

    let mut u = [[0i128; 3]; 3];
    #[allow(clippy::needless_range_loop)]
    for j in 0..3 {
        for k in 0..3 {
            u[k][j] = lll.h[j][k]
                .to_i128()
                .ok_or_else(|| LatticeError::NumericalFailure("transform entry exceeds 128 bits".into()))?;
        }
    }
    let vectors = std::array::from_fn(|j| std::array::from_fn(|r| ratio_to_f64(&lll.b[j][r], &l)));
    let l2 = &l * &l;
    let gs_norms2 = std::array::from_fn(|j| ratio_to_f64(&lll.d[j + 1], &(&lll.d[j] * &l2)));
    let mut mu = [[0.0; 3]; 3];
    for (i, row) in mu.iter_mut().enumerate() {
        row[i] = 1.0;
        for (j, m) in row.iter_mut().enumerate().take(i) {
            *m = ratio_to_f64(&lll.lam[i][j], &lll.d[j + 1]);
        }
    }
    let rb = ReducedBasis {
        u,
        vectors,
        gs_norms2,
        mu,
    };
    if !rb.vectors.iter().flatten().all(|v| v.is_finite()) || !rb.gs_norms2.iter().all(|&n| n > 0.0 && n.is_finite()) {
        return Err(LatticeError::NumericalFailure("reduced basis not representable in f64".into()));
    }
    Ok(rb)
}

/// Gram–Schmidt data (squared norms and μ) of the columns of T·U, computed
/// exactly from the integer Gram matrix and rounded once to doubles.
pub fn gram_schmidt_f64(t: &RationalMatrix, u: &Unimodular) -> Result<([f64; 3], [[f64; 3]; 3]), LatticeError> {
    let (g, l) = t.mul_unimodular(u).integer_scaled();
    let cols: [[BigInt; 3]; 3] = std::array::from_fn(|j| std::array::from_fn(|r| g[r][j].clone()));
    let mut lll = IntegralLll::new(cols);
    for k in 0..3 {
        lll.incorporate(k)?;
    }
    let l2 = &l * &l;
    let norms = std::array::from_fn(|j| ratio_to_f64(&lll.d[j + 1], &(&lll.d[j] * &l2)));
    let mut mu = [[0.0; 3]; 3];
    for (i, row) in mu.iter_mut().enumerate() {
        row[i] = 1.0;
        for (j, m) in row.iter_mut().enumerate().take(i) {
            *m = ratio_to_f64(&lll.lam[i][j], &lll.d[j + 1]);
        }
    }
    Ok((norms, mu))
}

/// Adjugate of an integer matrix; equals det·inverse.
pub fn adjugate(u: &Unimodular) -> [[BigInt; 3]; 3] {
    let c = |r: usize, k: usize| BigInt::from(u[r % 3][k % 3]);
    std::array::from_fn(|i| {
        std::array::from_fn(|j| c(j + 1, i + 1) * c(j + 2, i + 2) - c(j + 1, i + 2) * c(j + 2, i + 1))
    })
}

impl RationalMatrix {
    /// Copy with row r multiplied by num[r]/den[r] (all positive).
    pub fn scale_rows(&self, num: [BigInt; 3], den: [BigInt; 3]) -> Result<RationalMatrix, LatticeError> {
        let n = std::array::from_fn(|r| std::array::from_fn(|c| &self.num[r][c] * &num[r]));
        let d = std::array::from_fn(|r| &self.den[r] * &den[r]);
        RationalMatrix::new(n, d)
    }
}

pub fn det_unimodular(u: &Unimodular) -> BigInt {
    det3(&u.map(|r| r.map(BigInt::from)))
}

pub fn is_unimodular(u: &Unimodular) -> bool {
    det_unimodular(u).abs().is_one()
}

/// Exact Gram–Schmidt of the columns of T·U: squared norms and μ coefficients.
pub fn exact_gram_schmidt(t: &RationalMatrix, u: &Unimodular) -> ([BigRational; 3], [[BigRational; 3]; 3]) {
    let tu = t.mul_unimodular(u).to_rational();
    let cols: [[BigRational; 3]; 3] = std::array::from_fn(|j| std::array::from_fn(|r| tu[r][j].clone()));
    let rdot = |a: &[BigRational; 3], b: &[BigRational; 3]| -> BigRational {
        (0..3).map(|i| &a[i] * &b[i]).fold(BigRational::zero(), |x, y| x + y)
    };
    let mut star: [[BigRational; 3]; 3] = Default::default();
    let mut norms: [BigRational; 3] = Default::default();
    let mut mu: [[BigRational; 3]; 3] = Default::default();
    for i in 0..3 {
        let mut v = cols[i].clone();
        for j in 0..i {
            mu[i][j] = rdot(&cols[i], &star[j]) / &norms[j];
            for r in 0..3 {
                v[r] = &v[r] - &mu[i][j] * &star[j][r];
            }
        }
        mu[i][i] = BigRational::one();
        norms[i] = rdot(&v, &v);
        star[i] = v;
    }
    (norms, mu)
}

/// Exact check of the Lovász condition with parameter p/q for the columns of T·U.
///
/// Works on the integer basis L·T·U through its Gram determinants d_j and
/// λ = d_(k−1)·μ_(k,k−1): the condition reads p·d_(k−1)² ≤ q·(d_k·d_(k−2) + λ²),
/// which is homogeneous in L.
pub fn lovasz_holds_exact(t: &RationalMatrix, u: &Unimodular, delta: (i64, i64)) -> bool {
    let (m, _) = t.mul_unimodular(u).integer_scaled();
    let cols: [[BigInt; 3]; 3] = std::array::from_fn(|j| std::array::from_fn(|r| m[r][j].clone()));
    let g = |i: usize, j: usize| dot(&cols[i], &cols[j]);
    let (g00, g01, g02, g11, g12) = (g(0, 0), g(0, 1), g(0, 2), g(1, 1), g(1, 2));
    let d0 = g00.clone();
    let d1 = &g00 * &g11 - &g01 * &g01;
    let gram = [
        [g00.clone(), g01.clone(), g02.clone()],
        [g01.clone(), g11.clone(), g12.clone()],
        [g02.clone(), g12.clone(), g(2, 2)],
    ];
    let d2 = det3(&gram);
    let lambda10 = g01.clone();
    let lambda21 = &g00 * &g12 - &g02 * &g01;
    let (p, q) = (BigInt::from(delta.0), BigInt::from(delta.1));
    let holds = |d_prev: &BigInt, d_k: &BigInt, d_prev2: &BigInt, lambda: &BigInt| {
        &p * d_prev * d_prev <= &q * (d_k * d_prev2 + lambda * lambda)
    };
    holds(&d0, &d1, &BigInt::one(), &lambda10) && holds(&d1, &d2, &d0, &lambda21)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lovasz_rational(t: &RationalMatrix, u: &Unimodular, delta: (i64, i64)) -> bool {
        let (norms, mu) = exact_gram_schmidt(t, u);
        let delta = BigRational::new(delta.0.into(), delta.1.into());
        (1..3).all(|k| {
            let m = &mu[k][k - 1];
            norms[k] >= (&delta - m * m) * &norms[k - 1]
        })
    }

    #[test]
    fn integer_lovasz_matches_rational() {
        let t = RationalMatrix::from_i64([[3, 1, 7], [-2, 5, 1], [4, 4, 9]], [2, 3, 5]).unwrap();
        let shears: [Unimodular; 4] = [
            IDENTITY,
            [[1, 5, 0], [0, 1, 0], [0, 0, 1]],
            [[1, 0, 0], [-3, 1, 0], [2, 7, 1]],
            [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        ];
        for u in &shears {
            for delta in [(1, 4), (1, 2), (3, 4), GUARANTEED_DELTA] {
                assert_eq!(lovasz_holds_exact(&t, u, delta), lovasz_rational(&t, u, delta), "{u:?} {delta:?}");
            }
        }
        let rb = reduce_matrix(&t).unwrap();
        assert!(lovasz_holds_exact(&t, &rb.u, GUARANTEED_DELTA));
    }

    #[test]
    fn identity_is_already_reduced() {
        let t = RationalMatrix::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 1, 1]).unwrap();
        let rb = reduce_matrix(&t).unwrap();
        assert_eq!(rb.u, IDENTITY);
        assert_eq!(rb.gs_norms2, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(RationalMatrix::from_i64([[1, 2, 3], [2, 4, 6], [0, 0, 1]], [1, 1, 1]).is_err());
        assert!(RationalMatrix::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 0, 1]).is_err());
    }

    #[test]
    fn sheared_thin_lattice() {
        // diag(1, 1, 1e-9) with a shear in the last row
        let t = RationalMatrix::from_i64(
            [[1, 0, 0], [0, 1, 0], [123_456_789, 987_654_321, 1]],
            [1, 1, 1_000_000_000],
        )
        .unwrap();
        let rb = reduce_matrix(&t).unwrap();
        assert!(is_unimodular(&rb.u));
        assert!(lovasz_holds_exact(&t, &rb.u, GUARANTEED_DELTA));
        let det = t.det().to_f64().unwrap().abs();
        let prod: f64 = rb.norms().iter().product();
        assert!(prod <= 8.0 * det, "{prod} vs {det}");
    }

    #[test]
    fn round_div_ties() {
        let r = |n: i64, d: i64| round_div(&n.into(), &d.into());
        assert_eq!(r(5, 2), 3.into());
        assert_eq!(r(-5, 2), (-3).into());
        assert_eq!(r(4, 3), 1.into());
        assert_eq!(r(-4, 3), (-1).into());
    }

    #[test]
    fn inverse_round_trip() {
        let t = RationalMatrix::from_i64([[2, 1, 0], [0, 3, 1], [1, 0, 5]], [3, 1, 7]).unwrap();
        let m = t.to_rational();
        let inv = invert3(&m).unwrap();
        for (i, row) in m.iter().enumerate() {
            #[allow(clippy::needless_range_loop)]
            for j in 0..3 {
                let s = (0..3).map(|k| &row[k] * &inv[k][j]).fold(BigRational::zero(), |a, b| a + b);
                assert_eq!(s, BigRational::from_integer(BigInt::from((i == j) as i32)));
            }
        }
    }
}
