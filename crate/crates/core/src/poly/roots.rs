//! Roots of integer polynomials modulo primes, prime squares and general
//! moduli, and the counts ρ_f(m), ρ_f(m, N).

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::modp::{self, invmod, mulmod};
use super::{abs_big, eval_residues, Polynomial};
use crate::arith::{factorize, factorize_u64, is_prime_u64};
use crate::error::{Error, Result};

/// Primes up to this bound are handled by evaluating every residue.
pub const BRUTE_FORCE_PRIME_LIMIT: u64 = 10_000;

/// Prime powers `p^e` with `e >= 3` are supported up to this size.
pub const PRIME_POWER_LIMIT: u64 = 1_000_000;

/// Largest explicit root list materialised by [`roots_mod`].
pub const ROOT_LIST_BUDGET: u64 = 10_000_000;

/// Roots of `f` modulo a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "roots", rename_all = "snake_case")]
pub enum RootsModP {
    /// `f` vanishes identically mod p: every residue is a root.
    All { modulus: u64 },
    /// Ascending list of roots.
    Listed(Vec<u64>),
}

impl RootsModP {
    pub fn count(&self) -> u64 {
        match self {
            RootsModP::All { modulus } => *modulus,
            RootsModP::Listed(v) => v.len() as u64,
        }
    }

    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            RootsModP::All { modulus } => (0..*modulus).collect(),
            RootsModP::Listed(v) => v.clone(),
        }
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime_u64(p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not prime")))
    }
}

/// Roots of `f` in `Z/pZ`.
pub fn roots_mod_p(f: &Polynomial, p: u64) -> Result<RootsModP> {
    check_prime(p)?;
    Ok(roots_mod_p_unchecked(&f.residues(p), p))
}

pub(crate) fn roots_mod_p_unchecked(res: &[u64], p: u64) -> RootsModP {
    let reduced = modp::trim(res.to_vec());
    if reduced.is_empty() {
        return RootsModP::All { modulus: p };
    }
    if p <= BRUTE_FORCE_PRIME_LIMIT {
        RootsModP::Listed((0..p).filter(|&r| eval_residues(&reduced, r, p) == 0).collect())
    } else {
        RootsModP::Listed(modp::distinct_roots(&reduced, p))
    }
}

/// Hensel lifts of a root `r` of `f` mod `p` to roots mod `p^2`.
pub fn lift_roots_to_p2(f: &Polynomial, p: u64, r: u64) -> Result<Vec<u64>> {
    check_prime(p)?;
    if p >= 1 << 32 {
        return Err(Error::resource("prime for lifting to p^2", p, "2^32"));
    }
    let r = r % p;
    let p2 = p * p;
    let res2 = f.residues(p2);
    let fr = eval_residues(&res2, r, p2);
    if !fr.is_multiple_of(p) {
        return Err(Error::Domain(format!("{r} is not a root of f mod {p}")));
    }
    Ok(lift_unchecked(&res2, p, r))
}

/// `res2` are the coefficients of f mod p^2.
fn lift_unchecked(res2: &[u64], p: u64, r: u64) -> Vec<u64> {
    let p2 = p * p;
    let fr = eval_residues(res2, r, p2);
    let dres: Vec<u64> = res2
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mulmod(c, i as u64 % p, p))
        .collect();
    let dr = eval_residues(&dres, r, p);
    if dr != 0 {
        // r - f(r) * f'(r)^{-1}; f(r) = p * t so only t mod p matters
        let t = fr / p;
        let inv = invmod(dr, p).expect("non-zero mod prime");
        let shift = mulmod(t, inv, p);
        vec![(r + p2 - shift * p % p2) % p2]
    } else if fr == 0 {
        (0..p).map(|t| r + t * p).collect()
    } else {
        Vec::new()
    }
}

/// All roots of `f` modulo `p^2`, ascending.
pub fn roots_mod_p2(f: &Polynomial, p: u64) -> Result<Vec<u64>> {
    check_prime(p)?;
    if p >= 1 << 32 {
        return Err(Error::resource("prime for lifting to p^2", p, "2^32"));
    }
    let p2 = p * p;
    let res2 = f.residues(p2);
    let res1: Vec<u64> = res2.iter().map(|&c| c % p).collect();
    let mut out = match roots_mod_p_unchecked(&res1, p) {
        RootsModP::All { .. } => {
            // f = p*g: roots mod p^2 are the residues whose reduction is a root of g
            let g: Vec<u64> = res2.iter().map(|&c| c / p).collect();
            let base = roots_mod_p_unchecked(&g, p).to_vec();
            let mut v: Vec<u64> = (0..p)
                .flat_map(|t| base.iter().map(move |&r| r + t * p))
                .collect();
            v.sort_unstable();
            return Ok(v);
        }
        RootsModP::Listed(roots) => roots
            .into_iter()
            .flat_map(|r| lift_unchecked(&res2, p, r))
            .collect::<Vec<_>>(),
    };
    out.sort_unstable();
    Ok(out)
}

/// Number of roots mod `p^2`; never materialises the "all residues" case.
pub(crate) fn count_mod_p2(f: &Polynomial, p: u64) -> Result<u64> {
    let p2 = p * p;
    let res2 = f.residues(p2);
    let res1: Vec<u64> = res2.iter().map(|&c| c % p).collect();
    Ok(match roots_mod_p_unchecked(&res1, p) {
        RootsModP::All { .. } => {
            let g: Vec<u64> = res2.iter().map(|&c| c / p).collect();
            p * roots_mod_p_unchecked(&g, p).count()
        }
        RootsModP::Listed(roots) => roots
            .into_iter()
            .map(|r| lift_unchecked(&res2, p, r).len() as u64)
            .sum(),
    })
}

fn roots_mod_prime_power(f: &Polynomial, p: u64, e: u32) -> Result<Vec<u64>> {
    match e {
        1 => Ok(roots_mod_p(f, p)?.to_vec()),
        2 => roots_mod_p2(f, p),
        _ => {
            let q = p
                .checked_pow(e)
                .filter(|&q| q <= PRIME_POWER_LIMIT)
                .ok_or_else(|| {
                    Error::Domain(format!(
                        "roots modulo {p}^{e} unsupported (prime powers above exponent 2 must be <= {PRIME_POWER_LIMIT})"
                    ))
                })?;
            let res = f.residues(q);
            Ok((0..q).filter(|&r| eval_residues(&res, r, q) == 0).collect())
        }
    }
}

fn count_mod_prime_power(f: &Polynomial, p: u64, e: u32) -> Result<u64> {
    match e {
        1 => Ok(roots_mod_p(f, p)?.count()),
        2 if p < 1 << 32 => count_mod_p2(f, p),
        _ => Ok(roots_mod_prime_power(f, p, e)?.len() as u64),
    }
}

/// ρ_f(m): the number of roots of `f` in `Z/mZ`, multiplicative over the
/// prime-power factorization of `m`.
pub fn rho(f: &Polynomial, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::Domain("rho requires m >= 1".into()));
    }
    let mut total = 1u64;
    for (p, e) in factorize_u64(m) {
        let c = count_mod_prime_power(f, p, e)?;
        if c == 0 {
            return Ok(0);
        }
        total *= c;
    }
    Ok(total)
}

/// Explicit roots of `f` modulo `m`, ascending, assembled by CRT.
pub fn roots_mod(f: &Polynomial, m: u64) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::Domain("roots_mod requires m >= 1".into()));
    }
    let count = rho(f, m)?;
    if count > ROOT_LIST_BUDGET {
        return Err(Error::resource("root list", count, ROOT_LIST_BUDGET));
    }
    let mut acc: Vec<u64> = vec![0];
    let mut modulus = 1u64;
    for (p, e) in factorize_u64(m) {
        let q = p.pow(e);
        let local = roots_mod_prime_power(f, p, e)?;
        // x ≡ a (mod modulus), x ≡ b (mod q)
        let inv = invmod(modulus % q, q).expect("coprime moduli");
        let next = modulus * q;
        let mut combined = Vec::with_capacity(acc.len() * local.len());
        for &a in &acc {
            for &b in &local {
                let diff = (b + q - a % q) % q;
                let t = mulmod(diff, inv, q);
                combined.push(a + modulus * t);
            }
        }
        acc = combined;
        modulus = next;
    }
    acc.sort_unstable();
    Ok(acc)
}

/// ρ_f(m, N) = #{1 <= n <= N : m | f(n)}.
pub fn rho_counting(f: &Polynomial, m: u64, n: u64) -> Result<u64> {
    let roots = roots_mod(f, m)?;
    Ok(roots.iter().map(|&r| count_in_class(r, m, n)).sum())
}

/// `#{1 <= x <= n : x ≡ r (mod m)}` for `0 <= r < m`.
pub(crate) fn count_in_class(r: u64, m: u64, n: u64) -> u64 {
    if r == 0 {
        n / m
    } else if r > n {
        0
    } else {
        (n - r) / m + 1
    }
}

/// Positive integers `n <= limit` with `f(n) = 0`, ascending.
pub fn positive_integer_roots(f: &Polynomial, limit: u64) -> Result<Vec<u64>> {
    // Any root n > 0 divides the lowest non-zero coefficient.
    let c = f
        .coeffs()
        .iter()
        .find(|c| !c.is_zero())
        .expect("non-zero polynomial");
    if f.degree() == 0 {
        return Ok(Vec::new());
    }
    let c = abs_big(c);
    let mut divisors: Vec<BigUint> = vec![BigUint::from(1u32)];
    for (p, e) in factorize(&c)?.factors {
        let bound = BigUint::from(limit);
        let mut next = Vec::new();
        for d in &divisors {
            let mut x = d.clone();
            for _ in 0..=e {
                if x > bound {
                    break;
                }
                next.push(x.clone());
                x *= &p;
            }
        }
        divisors = next;
    }
    let mut roots: Vec<u64> = divisors
        .into_iter()
        .filter_map(|d| d.to_u64())
        .filter(|&d| d <= limit && f.evaluate(&d.into()).is_zero())
        .collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64(c).unwrap()
    }

    fn brute_roots(f: &Polynomial, m: u64) -> Vec<u64> {
        (0..m)
            .filter(|&r| {
                let v = f.evaluate(&r.into());
                (v % num_bigint::BigInt::from(m)).is_zero()
            })
            .collect()
    }

    #[test]
    fn roots_mod_p_examples() {
        assert_eq!(roots_mod_p(&p(&[1, 0, 1]), 5).unwrap(), RootsModP::Listed(vec![2, 3]));
        assert_eq!(roots_mod_p(&p(&[1, 0, 1]), 3).unwrap(), RootsModP::Listed(vec![]));
        assert_eq!(roots_mod_p(&p(&[0, 1]), 2).unwrap(), RootsModP::Listed(vec![0]));
        assert_eq!(roots_mod_p(&p(&[2, 4]), 2).unwrap(), RootsModP::All { modulus: 2 });
        assert!(roots_mod_p(&p(&[0, 1]), 4).is_err());
    }

    #[test]
    fn large_prime_matches_brute_force() {
        let f = p(&[-3, 7, 0, 1]);
        let q = 10_009;
        let fast = roots_mod_p(&f, q).unwrap().to_vec();
        assert_eq!(fast, brute_roots(&f, q));
        let g = p(&[-2, 0, 1]); // X^2 - 2 splits mod 10007? check against brute force
        assert_eq!(roots_mod_p(&g, 10_007).unwrap().to_vec(), brute_roots(&g, 10_007));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_roots_to_p2(&p(&[1, 0, 1]), 5, 2).unwrap(), vec![7]);
        assert_eq!(lift_roots_to_p2(&p(&[0, 0, 1]), 2, 0).unwrap(), vec![0, 2]);
        assert_eq!(lift_roots_to_p2(&p(&[2, 0, 1]), 2, 0).unwrap(), Vec::<u64>::new());
        assert!(matches!(
            lift_roots_to_p2(&p(&[1, 0, 1]), 5, 1),
            Err(Error::Domain(_))
        ));
        assert_eq!(brute_roots(&p(&[1, 0, 1]), 25), vec![7, 18]);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&p(&[1, 0, 1]), 4).unwrap(), 0);
        assert_eq!(rho(&p(&[1, 0, 1]), 25).unwrap(), 2);
        assert_eq!(rho(&p(&[0, 1]), 49).unwrap(), 1);
        assert_eq!(rho(&p(&[0, 1]), 1).unwrap(), 1);
        assert!(rho(&p(&[0, 1]), 0).is_err());
    }

    #[test]
    fn non_primitive_squares() {
        // 4X + 4 vanishes mod 4 everywhere; 2X + 2 has roots 1, 3 mod 4
        assert_eq!(roots_mod_p2(&p(&[4, 4]), 2).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(roots_mod_p2(&p(&[2, 2]), 2).unwrap(), vec![1, 3]);
        assert_eq!(rho(&p(&[18, 9]), 9).unwrap(), 9);
        for m in 1..=60 {
            for f in [p(&[4, 4]), p(&[2, 2]), p(&[6, 0, 3]), p(&[8, 12, 0, 4])] {
                assert_eq!(rho(&f, m).unwrap(), brute_roots(&f, m).len() as u64, "{f:?} m={m}");
            }
        }
    }

    #[test]
    fn higher_prime_powers() {
        let f = p(&[0, 0, 0, 1]);
        assert_eq!(rho(&f, 8).unwrap(), 4);
        assert_eq!(rho(&f, 27).unwrap(), brute_roots(&f, 27).len() as u64);
        assert!(rho(&f, 1 << 21).is_err());
    }

    #[test]
    fn explicit_roots_by_crt() {
        let f = p(&[1, 0, 1]);
        for m in 1..=130 {
            assert_eq!(roots_mod(&f, m).unwrap(), brute_roots(&f, m), "m={m}");
        }
    }

    #[test]
    fn rho_counting_examples() {
        assert_eq!(rho_counting(&p(&[0, 1]), 4, 4).unwrap(), 1);
        assert_eq!(rho_counting(&p(&[1, 0, 1]), 25, 10).unwrap(), 1);
        assert_eq!(rho_counting(&p(&[0, 1]), 1, 10).unwrap(), 10);
    }

    #[test]
    fn integer_roots() {
        // (X - 2)(X - 6)(X + 3)
        let f = p(&[36, -12, -5, 1]);
        assert_eq!(positive_integer_roots(&f, 100).unwrap(), vec![2, 6]);
        assert_eq!(positive_integer_roots(&f, 5).unwrap(), vec![2]);
        assert!(positive_integer_roots(&p(&[1, 0, 1]), 100).unwrap().is_empty());
        // X^2 (X - 4)
        assert_eq!(positive_integer_roots(&p(&[0, 0, -4, 1]), 10).unwrap(), vec![4]);
    }
}
