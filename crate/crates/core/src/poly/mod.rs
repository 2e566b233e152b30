//! Integer polynomials, discriminants, and local root counts.

pub(crate) mod modp;
pub(crate) mod roots;

pub use roots::{
    lift_roots_to_p2, positive_integer_roots, rho, rho_counting, roots_mod, roots_mod_p,
    roots_mod_p2, RootsModP, BRUTE_FORCE_PRIME_LIMIT, PRIME_POWER_LIMIT, ROOT_LIST_BUDGET,
};

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A non-zero polynomial with integer coefficients, constant term first.
///
/// Trailing zero coefficients are dropped on construction, so the last
/// coefficient is always the (non-zero) leading one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
    /// Copy of `coeffs` when every coefficient fits an `i64`.
    small: Option<Vec<i64>>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Result<Self> {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::Domain("the zero polynomial is not allowed".into()));
        }
        let small = coeffs.iter().map(ToPrimitive::to_i64).collect();
        Ok(Polynomial { coeffs, small })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The identity polynomial `X`.
    pub fn identity() -> Self {
        Self::from_i64(&[0, 1]).expect("non-zero")
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn small_coeffs(&self) -> Option<&[i64]> {
        self.small.as_deref()
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("non-empty")
    }

    /// gcd of all coefficients (positive).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    /// Exact value at `n`.
    pub fn evaluate(&self, n: &BigInt) -> BigInt {
        if let (Some(n), Some(_)) = (n.to_i64(), &self.small) {
            if let Some(v) = self.eval_i128(n as i128) {
                return BigInt::from(v);
            }
        }
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * n + c)
    }

    /// Horner evaluation in `i128`; `None` on overflow or large coefficients.
    pub fn eval_i128(&self, n: i128) -> Option<i128> {
        let small = self.small.as_ref()?;
        let mut acc: i128 = 0;
        for &c in small.iter().rev() {
            acc = acc.checked_mul(n)?.checked_add(c as i128)?;
        }
        Some(acc)
    }

    pub fn derivative(&self) -> Option<Polynomial> {
        if self.degree() == 0 {
            return None;
        }
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i)
            .collect();
        Polynomial::new(d).ok()
    }

    /// Coefficients reduced into `[0, m)`.
    pub fn residues(&self, m: u64) -> Vec<u64> {
        debug_assert!(m > 0);
        match &self.small {
            Some(s) => s
                .iter()
                .map(|&c| (c as i128).rem_euclid(m as i128) as u64)
                .collect(),
            None => {
                let mb = BigInt::from(m);
                self.coeffs
                    .iter()
                    .map(|c| c.mod_floor(&mb).to_u64().expect("reduced below m"))
                    .collect()
            }
        }
    }

    /// `f(x) mod m` for `m < 2^64`.
    pub fn eval_mod(&self, x: u64, m: u64) -> u64 {
        eval_residues(&self.residues(m), x, m)
    }

    /// Discriminant `(-1)^{k(k-1)/2} Res(f, f') / a_k`; defined as 1 for
    /// degree at most 1.
    pub fn discriminant(&self) -> BigInt {
        let k = self.degree();
        if k <= 1 {
            return BigInt::one();
        }
        if k == 2 {
            let (c, b, a) = (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]);
            return b * b - BigInt::from(4) * a * c;
        }
        let df = self.derivative().expect("degree >= 2");
        let res = resultant(self, &df);
        let sign_flip = (k * (k - 1) / 2) % 2 == 1;
        let (q, r) = res.div_rem(self.leading());
        debug_assert!(r.is_zero(), "a_k divides Res(f, f')");
        if sign_flip {
            -q
        } else {
            q
        }
    }

    /// The comma-separated coefficient string, constant term first.
    pub fn coeff_string(&self) -> String {
        self.coeffs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub(crate) fn eval_residues(res: &[u64], x: u64, m: u64) -> u64 {
    let x = x % m;
    let mut acc: u64 = 0;
    for &c in res.iter().rev() {
        acc = ((acc as u128 * x as u128 + c as u128) % m as u128) as u64;
    }
    acc
}

/// Resultant via the Sylvester matrix and fraction-free (Bareiss)
/// elimination.
pub(crate) fn resultant(f: &Polynomial, g: &Polynomial) -> BigInt {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n;
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    // rows hold coefficients highest degree first
    for row in 0..n {
        for (j, c) in f.coeffs.iter().rev().enumerate() {
            mat[row][row + j] = c.clone();
        }
    }
    for row in 0..m {
        for (j, c) in g.coeffs.iter().rev().enumerate() {
            mat[n + row][row + j] = c.clone();
        }
    }
    bareiss_determinant(mat)
}

/// Exact determinant of a square integer matrix.
pub(crate) fn bareiss_determinant(mut mat: Vec<Vec<BigInt>>) -> BigInt {
    let n = mat.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if mat[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !mat[i][k].is_zero()) else {
                return BigInt::zero();
            };
            mat.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &mat[i][j] * &mat[k][k] - &mat[i][k] * &mat[k][j];
                mat[i][j] = v / &prev;
            }
        }
        prev = mat[k][k].clone();
    }
    let det = mat[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.coeff_string())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]", self.coeff_string())
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Parses `a0,a1,...,ak`.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("bad coefficient {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Polynomial::new(coeffs)
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.coeff_string())
    }
}

/// Sign-aware absolute value helper shared by counting code.
pub(crate) fn abs_big(v: &BigInt) -> num_bigint::BigUint {
    v.abs().to_biguint().expect("non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64(c).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(p(&[1, 0, 1]).evaluate(&3.into()), 10.into());
        assert_eq!(p(&[0, 1]).evaluate(&7.into()), 7.into());
        assert_eq!(p(&[5, -1, 2]).evaluate(&0.into()), 5.into());
    }

    #[test]
    fn evaluate_overflow_falls_back() {
        let f = p(&[1, i64::MAX, i64::MAX]);
        let n = BigInt::from(1u64 << 40);
        let expect = BigInt::from(1) + BigInt::from(i64::MAX) * &n + BigInt::from(i64::MAX) * &n * &n;
        assert_eq!(f.evaluate(&n), expect);
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(p(&[1, 0, 1]).discriminant(), (-4).into());
        assert_eq!(p(&[-1, 0, 1]).discriminant(), 4.into());
        assert_eq!(p(&[0, 0, 1]).discriminant(), 0.into());
        assert_eq!(p(&[3, 2]).discriminant(), 1.into());
    }

    #[test]
    fn cubic_discriminant() {
        // X^3 + aX + b has discriminant -4a^3 - 27b^2
        for (a, b) in [(1i64, 1i64), (-2, 3), (0, -2), (-3, 2)] {
            let expect = -4 * a * a * a - 27 * b * b;
            assert_eq!(p(&[b, a, 0, 1]).discriminant(), expect.into(), "a={a} b={b}");
        }
        // general cubic formula b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd
        let (d, c, b, a) = (7i64, -3, 5, 2);
        let expect = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d
            + 18 * a * b * c * d;
        assert_eq!(p(&[d, c, b, a]).discriminant(), expect.into());
    }

    #[test]
    fn quadratic_formula_matches_resultant() {
        for c in [[1i64, 0, 1], [3, -7, 2], [-5, 4, -9], [0, 6, 3]] {
            let f = p(&c);
            let df = f.derivative().unwrap();
            // k = 2: sign (-1)^1, divide by a_2
            let via_res = -(resultant(&f, &df) / f.leading());
            assert_eq!(f.discriminant(), via_res, "{c:?}");
        }
    }

    #[test]
    fn quartic_with_repeated_root() {
        // (X - 1)^2 (X + 2)(X + 3)
        let f = p(&[6, -7, -3, 3, 1]);
        assert_eq!(f.evaluate(&1.into()), 0.into());
        assert_eq!(f.discriminant(), 0.into());
        // X^4 + 1 has discriminant 256
        assert_eq!(p(&[1, 0, 0, 0, 1]).discriminant(), 256.into());
    }

    #[test]
    fn parse_and_display() {
        let f: Polynomial = "1,0,1".parse().unwrap();
        assert_eq!(f.degree(), 2);
        assert_eq!(f.to_string(), "1,0,1");
        let g: Polynomial = " 4, 4 ,0".parse().unwrap();
        assert_eq!(g.to_string(), "4,4");
        assert!(!g.is_primitive());
        assert!("0,0".parse::<Polynomial>().is_err());
        assert!("1,x".parse::<Polynomial>().is_err());
        assert!("".parse::<Polynomial>().is_err());
    }
}
