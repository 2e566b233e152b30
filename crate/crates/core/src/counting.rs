//! Exact counts of `n <= N` with `f(n)` square-free (two independent
//! algorithms) or square-full, and the exact Möbius decomposition
//! `S = M + T1 + T2` of the square-free count.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, factorize_u64, is_squarefree, is_squarefree_u64, is_squarefull,
    is_squarefull_u64, sieve_primes};
use crate::error::{Error, Result};
use crate::poly::{abs_big, positive_integer_roots, roots_mod_p2, Polynomial};

/// Work unit for splitting `1..=N` across threads.
const CHUNK: u64 = 4_096;

/// Default small-prime bound of the sieve method.
pub const DEFAULT_SIEVE_BOUND: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Factorize every value.
    Direct,
    /// Mark multiples of small prime squares, factorize survivors' cofactors.
    Sieve,
    /// Square-full test of every value.
    Squarefull,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Sieve => "sieve",
            Method::Squarefull => "squarefull",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountResult {
    pub poly: Polynomial,
    pub n: u64,
    pub count: u64,
    pub method: Method,
    /// Some `f(n)` was negative and its absolute value was tested.
    pub negative_values: bool,
}

/// `|f(n)|`, kept in a machine word when possible.
pub(crate) enum Magnitude {
    Small(u64),
    Big(BigUint),
}

pub(crate) fn magnitude(f: &Polynomial, n: u64) -> (Magnitude, bool) {
    if let Some(v) = f.eval_i128(n as i128) {
        let neg = v < 0;
        let a = v.unsigned_abs();
        return match u64::try_from(a) {
            Ok(s) => (Magnitude::Small(s), neg),
            Err(_) => (Magnitude::Big(BigUint::from(a)), neg),
        };
    }
    let v = f.evaluate(&BigInt::from(n));
    let neg = v.sign() == num_bigint::Sign::Minus;
    let a = abs_big(&v);
    match a.to_u64() {
        Some(s) => (Magnitude::Small(s), neg),
        None => (Magnitude::Big(a), neg),
    }
}

fn ensure_nonvanishing(f: &Polynomial, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    match positive_integer_roots(f, n)?.first() {
        Some(&root) => Err(Error::VanishesAt { n: root }),
        None => Ok(()),
    }
}

/// Sums `per_n` over `1..=n` in fixed chunks; the result does not depend on
/// the number of worker threads.
fn sum_over_range<F>(n: u64, per_n: F) -> Result<(u64, bool)>
where
    F: Fn(u64) -> Result<(bool, bool)> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(u64, bool)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK + 1;
            let hi = ((c + 1) * CHUNK).min(n);
            let mut count = 0;
            let mut neg = false;
            for x in lo..=hi {
                let (hit, negative) = per_n(x)?;
                count += hit as u64;
                neg |= negative;
            }
            Ok((count, neg))
        })
        .collect::<Result<_>>()?;
    Ok(parts
        .into_iter()
        .fold((0, false), |(c, g), (c2, g2)| (c + c2, g | g2)))
}

/// S_f(N) by factorizing every `|f(n)|`; the reference count.
pub fn count_squarefree_direct(f: &Polynomial, n: u64) -> Result<CountResult> {
    ensure_nonvanishing(f, n)?;
    let (count, neg) = sum_over_range(n, |x| {
        let (m, neg) = magnitude(f, x);
        let sf = match m {
            Magnitude::Small(v) => is_squarefree_u64(v),
            Magnitude::Big(v) => is_squarefree(&v)?,
        };
        Ok((sf, neg))
    })?;
    Ok(CountResult {
        poly: f.clone(),
        n,
        count,
        method: Method::Direct,
        negative_values: neg,
    })
}

/// S_f(N) by sieving out `n` with `p^2 | f(n)` for `p <= small_prime_bound`
/// (from the roots of `f` mod `p^2`), then testing each survivor's value with
/// those primes divided out.
pub fn count_squarefree_sieve(f: &Polynomial, n: u64, small_prime_bound: u64) -> Result<CountResult> {
    if small_prime_bound < 2 {
        return Err(Error::Domain("sieve bound B0 must be >= 2".into()));
    }
    ensure_nonvanishing(f, n)?;
    let primes = sieve_primes(small_prime_bound)?;
    let len = usize::try_from(n).map_err(|_| Error::resource("sieve length", n, usize::MAX))?;
    let mut marked = vec![false; len + 1];
    for &p in &primes {
        let p2 = p * p;
        for r in roots_mod_p2(f, p)? {
            let start = if r == 0 { p2 } else { r };
            let mut x = start;
            while x <= n {
                marked[x as usize] = true;
                x += p2;
            }
        }
    }
    let (count, neg) = sum_over_range(n, |x| {
        let (m, neg) = magnitude(f, x);
        if marked[x as usize] {
            return Ok((false, neg));
        }
        // every p <= B0 divides f(x) at most once here
        let sf = match m {
            Magnitude::Small(mut v) => {
                for &p in &primes {
                    if v % p == 0 {
                        v /= p;
                    }
                }
                is_squarefree_u64(v)
            }
            Magnitude::Big(mut v) => {
                for &p in &primes {
                    if (&v % p) == BigUint::ZERO {
                        v /= p;
                    }
                }
                is_squarefree(&v)?
            }
        };
        Ok((sf, neg))
    })?;
    Ok(CountResult {
        poly: f.clone(),
        n,
        count,
        method: Method::Sieve,
        negative_values: neg,
    })
}

/// Number of `n <= N` with `|f(n)|` square-full (1 counts as square-full).
pub fn count_squarefull(f: &Polynomial, n: u64) -> Result<CountResult> {
    ensure_nonvanishing(f, n)?;
    let (count, neg) = sum_over_range(n, |x| {
        let (m, neg) = magnitude(f, x);
        let sf = match m {
            Magnitude::Small(v) => is_squarefull_u64(v),
            Magnitude::Big(v) => is_squarefull(&v)?,
        };
        Ok((sf, neg))
    })?;
    Ok(CountResult {
        poly: f.clone(),
        n,
        count,
        method: Method::Squarefull,
        negative_values: neg,
    })
}

/// The split of `S_f(N) = Σ_d μ(d) ρ_f(d^2, N)` at `D` and `E`, with the
/// μ²-weighted majorants of the two tails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub n: u64,
    pub d: u64,
    pub e: u64,
    /// `ceil(sqrt(max_{n<=N} |f(n)|))`: no `d` beyond it contributes.
    #[serde(serialize_with = "crate::serde_util::biguint_str")]
    pub d_max: BigUint,
    /// `Σ_{d <= D} μ(d) ρ_f(d^2, N)`
    pub main: i64,
    /// `Σ_{D < d <= E} μ(d) ρ_f(d^2, N)`
    pub t1: i64,
    /// `Σ_{d > E} μ(d) ρ_f(d^2, N)`
    pub t2: i64,
    /// `Σ_{D < d <= E} μ^2(d) ρ_f(d^2, N)`
    pub r1: u64,
    /// `Σ_{d > E} μ^2(d) ρ_f(d^2, N)`
    pub r2: u64,
    /// `S_f(N)`
    pub s: u64,
}

#[derive(Default, Clone, Copy)]
struct Partial {
    main: i64,
    t1: i64,
    t2: i64,
    r1: u64,
    r2: u64,
}

impl Partial {
    fn add(&mut self, mu: i64, d_le_d: bool, d_le_e: bool) {
        if d_le_d {
            self.main += mu;
        } else if d_le_e {
            self.t1 += mu;
            self.r1 += 1;
        } else {
            self.t2 += mu;
            self.r2 += 1;
        }
    }

    fn merge(self, o: Partial) -> Partial {
        Partial {
            main: self.main + o.main,
            t1: self.t1 + o.t1,
            t2: self.t2 + o.t2,
            r1: self.r1 + o.r1,
            r2: self.r2 + o.r2,
        }
    }
}

/// Exact decomposition of `S_f(N)`.
///
/// Each `n` contributes `μ(d)` for every square-free `d` with `d^2 | f(n)`,
/// read off the factorization of `f(n)`; summing over `n` per `d`-range gives
/// the three parts. The identity `S = M + T1 + T2` is checked against
/// [`count_squarefree_direct`] before returning.
pub fn mobius_decomposition(f: &Polynomial, n: u64, d: u64, e: u64) -> Result<Decomposition> {
    if d == 0 || d > e {
        return Err(Error::Precondition(format!("need 1 <= D <= E, got D = {d}, E = {e}")));
    }
    ensure_nonvanishing(f, n)?;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(Partial, BigUint)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Partial::default();
            let mut max = BigUint::ZERO;
            for x in c * CHUNK + 1..=((c + 1) * CHUNK).min(n) {
                let (m, _) = magnitude(f, x);
                match m {
                    Magnitude::Small(v) => {
                        if BigUint::from(v) > max {
                            max = BigUint::from(v);
                        }
                        let sq: Vec<u64> = factorize_u64(v)
                            .into_iter()
                            .filter(|&(_, k)| k >= 2)
                            .map(|(p, _)| p)
                            .collect();
                        for mask in 0u32..(1 << sq.len()) {
                            let dd: u64 = sq
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| mask >> i & 1 == 1)
                                .map(|(_, &p)| p)
                                .product();
                            let mu = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
                            acc.add(mu, dd <= d, dd <= e);
                        }
                    }
                    Magnitude::Big(v) => {
                        let sq: Vec<BigUint> = factorize(&v)?
                            .factors
                            .into_iter()
                            .filter(|&(_, k)| k >= 2)
                            .map(|(p, _)| p)
                            .collect();
                        if v > max {
                            max = v;
                        }
                        let (bd, be) = (BigUint::from(d), BigUint::from(e));
                        for mask in 0u32..(1 << sq.len()) {
                            let dd: BigUint = sq
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| mask >> i & 1 == 1)
                                .map(|(_, p)| p.clone())
                                .product();
                            let mu = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
                            acc.add(mu, dd <= bd, dd <= be);
                        }
                    }
                }
            }
            Ok((acc, max))
        })
        .collect::<Result<_>>()?;
    let (total, max) = parts.into_iter().fold(
        (Partial::default(), BigUint::ZERO),
        |(a, m), (b, m2)| (a.merge(b), m.max(m2)),
    );
    let s = count_squarefree_direct(f, n)?.count;
    let sum = total.main + total.t1 + total.t2;
    if sum != s as i64 {
        return Err(Error::Internal(format!(
            "M + T1 + T2 = {sum} but S = {s} for {f} at N = {n}"
        )));
    }
    Ok(Decomposition {
        n,
        d,
        e,
        d_max: ceil_sqrt(&max),
        main: total.main,
        t1: total.t1,
        t2: total.t2,
        r1: total.r1,
        r2: total.r2,
        s,
    })
}

pub(crate) fn ceil_sqrt(x: &BigUint) -> BigUint {
    let r = x.sqrt();
    if &r * &r < *x {
        r + BigUint::one()
    } else {
        r
    }
}

/// `D = ceil(H^{1/2})`, `E = ceil(H^{1/2} N^{(k+1)/2})`, both exact.
pub fn default_parameters(h: u64, n: u64, k: usize) -> Result<(u64, u64)> {
    if h == 0 || n == 0 {
        return Err(Error::Domain("H and N must be >= 1".into()));
    }
    let d = ceil_sqrt(&BigUint::from(h));
    let e = ceil_sqrt(&(BigUint::from(h) * BigUint::from(n).pow(k as u32 + 1)));
    let to_u64 = |v: BigUint, what| v.to_u64().ok_or_else(|| Error::resource(what, v, u64::MAX));
    Ok((to_u64(d, "parameter D")?, to_u64(e, "parameter E")?))
}
