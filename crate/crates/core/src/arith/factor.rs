//! Integer factorization: trial division by small sieved primes, then Brent's
//! variant of Pollard rho for the cofactor, with primality decided by
//! deterministic Miller-Rabin (below 3.3e24) or Baillie-PSW above.
//!
//! Everything here is deterministic: rho polynomial constants are taken from a
//! fixed sequence, so a given input always yields the same call sequence.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::sieve::small_primes;
use crate::error::{Error, Result};

/// Trial division stops at primes below this bound; remaining cofactors
/// below `TRIAL_BOUND^2` are prime.
const TRIAL_BOUND: u64 = 1 << 10;

/// Miller-Rabin with the first 13 prime bases is exact below this value.
const MR13_EXACT_BELOW: u128 = 3_317_044_064_679_887_385_961_981;

/// A complete prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    #[serde(serialize_with = "crate::serde_util::biguint_str")]
    pub value: BigUint,
    /// `(prime, exponent)` pairs, primes strictly increasing.
    #[serde(serialize_with = "crate::serde_util::factor_list")]
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Product of `p^e` over the listed factors.
    pub fn recompose(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn is_squarefull(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e >= 2)
    }

    pub fn mobius(&self) -> i8 {
        if self.is_squarefree() {
            if self.factors.len().is_multiple_of(2) {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }
}

/// Factorizes `n >= 1`.
pub fn factorize(n: &BigUint) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Domain("factorize requires n >= 1".into()));
    }
    let factors = match n.to_u64() {
        Some(small) => factorize_u64(small)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect(),
        None => factorize_big(n),
    };
    Ok(Factorization {
        value: n.clone(),
        factors,
    })
}

/// Factorization of a machine word; `1` (and `0`) give an empty list.
pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    for &p in small_primes() {
        if p >= TRIAL_BOUND || p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut big = Vec::new();
        split_large(n, &mut big);
        big.sort_unstable();
        for p in big {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

/// Pushes the prime factors (with multiplicity) of `n`, whose prime factors
/// are all at least `TRIAL_BOUND` or which is below `TRIAL_BOUND^2`.
fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if n < TRIAL_BOUND * TRIAL_BOUND || is_prime_u64(n) {
        out.push(n);
        return;
    }
    let r = n.sqrt();
    if r * r == n {
        split_large(r, out);
        split_large(r, out);
        return;
    }
    let d = brent_rho_u64(n);
    split_large(d, out);
    split_large(n / d, out);
}

pub fn is_squarefree_u64(mut n: u64) -> bool {
    debug_assert!(n >= 1);
    for &p in small_primes() {
        if p >= TRIAL_BOUND || p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
    }
    if n < TRIAL_BOUND * TRIAL_BOUND || is_prime_u64(n) {
        return true;
    }
    let r = n.sqrt();
    if r * r == n {
        return false;
    }
    let mut big = Vec::new();
    split_large(n, &mut big);
    big.sort_unstable();
    big.windows(2).all(|w| w[0] != w[1])
}

pub fn is_squarefull_u64(n: u64) -> bool {
    factorize_u64(n).iter().all(|&(_, e)| e >= 2)
}

/// True iff no prime square divides `n` (`n >= 1`).
pub fn is_squarefree(n: &BigUint) -> Result<bool> {
    match n.to_u64() {
        Some(0) => Err(Error::Domain("is_squarefree requires n >= 1".into())),
        Some(v) => Ok(is_squarefree_u64(v)),
        None => Ok(factorize(n)?.is_squarefree()),
    }
}

/// True iff every prime exponent of `n` is at least 2; true for `n = 1`.
pub fn is_squarefull(n: &BigUint) -> Result<bool> {
    match n.to_u64() {
        Some(0) => Err(Error::Domain("is_squarefull requires n >= 1".into())),
        Some(v) => Ok(is_squarefull_u64(v)),
        None => Ok(factorize(n)?.is_squarefull()),
    }
}

/// μ(n) for a single `n >= 1`, via factorization.
pub fn mobius(n: u64) -> Result<i8> {
    if n == 0 {
        return Err(Error::Domain("mobius requires n >= 1".into()));
    }
    let f = factorize_u64(n);
    Ok(if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    })
}

// ---------------------------------------------------------------------------
// 64-bit Montgomery arithmetic

#[derive(Clone, Copy)]
struct Montgomery {
    n: u64,
    inv: u64, // n^{-1} mod 2^64
    r2: u64,  // 2^128 mod n
}

impl Montgomery {
    fn new(n: u64) -> Self {
        debug_assert!(n % 2 == 1);
        let mut inv = n;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(n.wrapping_mul(inv)));
        }
        let r1 = ((1u128 << 64) % n as u128) as u64;
        let r2 = (r1 as u128 * r1 as u128 % n as u128) as u64;
        Montgomery { n, inv, r2 }
    }

    #[inline]
    fn reduce(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.inv);
        let mn = m as u128 * self.n as u128;
        let (th, mh) = ((t >> 64) as u64, (mn >> 64) as u64);
        if th >= mh {
            th - mh
        } else {
            th.wrapping_sub(mh).wrapping_add(self.n)
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a as u128 * b as u128)
    }

    fn enter(&self, a: u64) -> u64 {
        self.mul(a % self.n, self.r2)
    }

    fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = self.enter(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let (s, carry) = a.overflowing_add(b);
        if carry || s >= self.n {
            s.wrapping_sub(self.n)
        } else {
            s
        }
    }
}

/// Deterministic primality for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let mont = Montgomery::new(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let one = mont.enter(1);
    let minus_one = mont.enter(n - 1);
    // Sinclair's base set, exact for all n < 2^64.
    'bases: for &a in &[2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = mont.pow(mont.enter(a), d);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..s {
            x = mont.mul(x, x);
            if x == minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// A non-trivial factor of the odd composite `n` (not a perfect square).
fn brent_rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mont = Montgomery::new(n);
    for c in 1u64.. {
        let c_m = mont.enter(c);
        let step = |x: u64| mont.add(mont.mul(x, x), c_m);
        let mut y = mont.enter(2);
        let mut x = y;
        let mut ys = y;
        let mut q = mont.enter(1);
        let mut g = 1u64;
        let mut r = 1u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = step(y);
                    q = mont.mul(q, x.abs_diff(y));
                }
                g = mont.reduce(q as u128).gcd(&n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys);
                g = mont.reduce(x.abs_diff(ys) as u128).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho constant sequence exhausted")
}

// ---------------------------------------------------------------------------
// Arbitrary-precision path

fn factorize_big(n: &BigUint) -> Vec<(BigUint, u32)> {
    let mut rest = n.clone();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for &p in small_primes() {
        if p >= TRIAL_BOUND {
            break;
        }
        let mut e = 0;
        while (&rest % p).is_zero() {
            rest /= p;
            e += 1;
        }
        if e > 0 {
            out.push((BigUint::from(p), e));
        }
    }
    let mut large: Vec<BigUint> = Vec::new();
    split_large_big(rest, &mut large);
    large.sort();
    for p in large {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn split_large_big(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if let Some(small) = n.to_u64() {
        let mut v = Vec::new();
        split_large(small, &mut v);
        out.extend(v.into_iter().map(BigUint::from));
        return;
    }
    if is_prime(&n) {
        out.push(n);
        return;
    }
    let r = n.sqrt();
    if &r * &r == n {
        split_large_big(r.clone(), out);
        split_large_big(r, out);
        return;
    }
    let d = brent_rho_big(&n);
    let q = &n / &d;
    split_large_big(d, out);
    split_large_big(q, out);
}

fn brent_rho_big(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    for c in 1u64.. {
        let c = BigUint::from(c);
        let step = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = one.clone();
        let mut g = one.clone();
        let mut r = 1u64;
        const BATCH: u64 = 64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = step(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = step(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
    }
    unreachable!("rho constant sequence exhausted")
}

/// Primality of an arbitrary-precision integer. Exact below 3.3e24; above
/// that the Baillie-PSW test is used.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    const BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    for &p in &BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let exact = n.to_u128().is_some_and(|v| v < MR13_EXACT_BELOW);
    if exact {
        BASES.iter().all(|&a| miller_rabin_big(n, &BigUint::from(a)))
    } else {
        miller_rabin_big(n, &BigUint::from(2u32)) && strong_lucas_big(n)
    }
}

fn miller_rabin_big(n: &BigUint, a: &BigUint) -> bool {
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    let n = BigInt::from(n.clone());
    let mut a = a.mod_floor(&n);
    let mut n = n;
    let mut t = 1;
    let three = BigInt::from(3);
    let five = BigInt::from(5);
    let eight = BigInt::from(8);
    let four = BigInt::from(4);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&four) == three && n.mod_floor(&four) == three {
            t = -t;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

/// Strong Lucas probable-prime test with Selfridge's parameter choice.
fn strong_lucas_big(n: &BigUint) -> bool {
    let r = n.sqrt();
    if &r * &r == *n {
        return false;
    }
    let mut d = BigInt::from(5);
    loop {
        match jacobi(&d, n) {
            -1 => break,
            0
                if d.magnitude() != n => {
                    return false;
                }
            _ => {}
        }
        d = if d.sign() == Sign::Plus {
            -(d + 2i32)
        } else {
            -(d - 2i32)
        };
    }
    let ni = BigInt::from(n.clone());
    let q: BigInt = (BigInt::one() - &d) / 4i32;
    let md = |x: BigInt| x.mod_floor(&ni);
    let half = |x: BigInt| {
        let x = if x.is_odd() { x + &ni } else { x };
        md(x >> 1)
    };
    let np1 = n + 1u32;
    let s = np1.trailing_zeros().unwrap_or(0);
    let k = &np1 >> s;
    // Binary ladder computing U_k, V_k, Q^k with P = 1.
    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = md(q.clone());
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        u = md(&u * &v);
        v = md(&v * &v - 2 * &qk);
        qk = md(&qk * &qk);
        if k.bit(i) {
            let u2 = half(&u + &v);
            let v2 = half(&d * &u + &v);
            u = u2;
            v = v2;
            qk = md(&qk * &q);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = md(&v * &v - 2 * &qk);
        qk = md(&qk * &qk);
        if v.is_zero() {
            return true;
        }
    }
    false
}
