//! Double-double floating point (about 106 bits of mantissa), enough to carry
//! Euler products over ~10^5 factors without visible rounding drift.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Real {
    hi: f64,
    lo: f64,
}

/// Relative rounding error of one arithmetic operation.
pub const REAL_EPSILON: f64 = 4.93e-32; // 2^-104

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Real {
    pub const ZERO: Real = Real { hi: 0.0, lo: 0.0 };
    pub const ONE: Real = Real { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Real { hi: x, lo: 0.0 }
    }

    /// Exact for every `u64`.
    pub fn from_u64(x: u64) -> Self {
        let hi = x as f64;
        let lo = (x as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Real { hi, lo }
    }

    pub fn from_i64(x: i64) -> Self {
        let r = Real::from_u64(x.unsigned_abs());
        if x < 0 {
            -r
        } else {
            r
        }
    }

    /// `num / den` correctly rounded to double-double precision.
    pub fn ratio(num: u64, den: u64) -> Self {
        Real::from_u64(num) / Real::from_u64(den)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let lo = self.lo.floor();
            let (hi, lo) = quick_two_sum(hi, lo);
            Real { hi, lo }
        } else {
            Real { hi, lo: 0.0 }
        }
    }

    /// Decimal expansion with `digits` digits after the point.
    pub fn to_decimal(self, digits: usize) -> String {
        let mut out = String::new();
        let mut x = self;
        if x.hi < 0.0 {
            out.push('-');
            x = -x;
        }
        let int = x.floor();
        out.push_str(&format!("{}", int.to_f64() as u128));
        out.push('.');
        let mut frac = x - int;
        let ten = Real::from_f64(10.0);
        for _ in 0..digits {
            frac = frac * ten;
            let d = frac.floor();
            let dv = d.to_f64().clamp(0.0, 9.0) as u8;
            out.push((b'0' + dv) as char);
            frac = frac - Real::from_f64(dv as f64);
        }
        out
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, o: Real) -> Real {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Real { hi, lo }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, o: Real) -> Real {
        self + (-o)
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, o: Real) -> Real {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Real { hi, lo }
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, o: Real) -> Real {
        // two Newton-style correction steps
        let q1 = self.hi / o.hi;
        let r = self - o * Real::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Real::from_f64(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Real { hi, lo } + Real::from_f64(q3)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, o: &Real) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            other => other,
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(f.precision().unwrap_or(30)))
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_integers() {
        let big = u64::MAX - 12;
        let r = Real::from_u64(big);
        assert_eq!(r.hi as i128 + r.lo as i128, big as i128);
    }

    #[test]
    fn one_third_is_precise() {
        let third = Real::ratio(1, 3);
        let back = third * Real::from_f64(3.0);
        assert!((back - Real::ONE).abs().to_f64() < 1e-30);
        assert_eq!(third.to_decimal(31), "0.3333333333333333333333333333333");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Real::ratio(768, 1225).to_decimal(12), "0.626938775510");
        assert_eq!(Real::from_i64(-5).to_decimal(2), "-5.00");
    }

    #[test]
    fn long_product_keeps_precision() {
        // prod_{n=2}^{N} (1 - 1/n^2) = (N + 1) / (2N)
        let n = 100_000u64;
        let mut acc = Real::ONE;
        for i in 2..=n {
            acc = acc * Real::ratio(i * i - 1, i * i);
        }
        let exact = Real::ratio(n + 1, 2 * n);
        assert!((acc - exact).abs().to_f64() < 1e-25);
    }
}
