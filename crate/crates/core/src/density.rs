//! The density `c_f = Σ_d μ(d) ρ_f(d^2) / d^2` of `n` with `f(n)` square-free.
//!
//! The primary evaluation is the Euler product `Π_p (1 - ρ_f(p^2)/p^2)`,
//! truncated at a prime bound `P` and reported with a rigorous bound on the
//! neglected tail. The raw Möbius partial sum is kept as an independent
//! cross-check.
//!
//! Tail bound. For `p ∤ a_k Δ_f` Hensel's lemma gives `ρ_f(p^2) = ρ_f(p) <= k`,
//! so those primes contribute at most `k Σ_{p>P} p^-2 <= k/(P-1)`. A prime
//! `p > P` dividing `a_k Δ_f` still has `ρ_f(p^2) <= k p` (at most `k` roots
//! mod `p`, each with at most `p` lifts), i.e. a contribution `<= k/P`; the
//! number of such primes is bounded by `log(R)/log(P+1)` where `R` is the part
//! of `|a_k Δ_f|` free of primes `<= P`.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{mobius_table, sieve_primes};
use crate::error::{Error, Result};
use crate::poly::modp;
use crate::poly::{rho, Polynomial};
use crate::real::{Real, REAL_EPSILON};

/// Truncated density with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityResult {
    pub value: Real,
    /// Requested truncation bound `P`.
    pub truncation: u64,
    /// Largest prime actually included (0 when none).
    pub largest_prime: u64,
    /// Upper bound on `|c_f - value|` from the primes `> P`.
    pub tail_bound: f64,
    /// Upper bound on the accumulated floating-point error.
    pub rounding_bound: f64,
    /// True iff some included prime has `ρ_f(p^2) = p^2`, forcing `c_f = 0`.
    pub zero_certified: bool,
    pub primes_used: usize,
}

/// Euler product over the primes `p <= truncation`.
pub fn cf_truncated(f: &Polynomial, truncation: u64) -> Result<DensityResult> {
    let primes = sieve_primes(truncation)?;
    cf_truncated_with_primes(f, truncation, &primes)
}

/// As [`cf_truncated`] with a caller-supplied ascending prime list covering
/// exactly the primes `<= truncation`. Lets family experiments share one
/// sieve across many polynomials.
pub fn cf_truncated_with_primes(
    f: &Polynomial,
    truncation: u64,
    primes: &[u64],
) -> Result<DensityResult> {
    if truncation < 2 {
        return Err(Error::Domain("density truncation P must be >= 2".into()));
    }
    if truncation >= 1 << 32 {
        return Err(Error::resource("density truncation", truncation, "2^32"));
    }
    if !f.is_primitive() {
        return Err(Error::Domain(format!(
            "density requires a primitive polynomial, got content {} for {f}",
            f.content()
        )));
    }
    let disc = f.discriminant();
    if disc.is_zero() {
        return Err(Error::Domain(format!(
            "{f} has a repeated factor (discriminant 0); density formula requires square-free f"
        )));
    }
    let k = f.degree() as u64;
    let bad = (f.leading() * &disc).abs();
    let bad_small = bad.to_u128();

    let divides_bad = |p: u64| match bad_small {
        Some(b) => b % p as u128 == 0,
        None => (&bad % p).is_zero(),
    };
    let disc_small = disc.to_i128();
    let rho_p2 = |p: u64| -> Result<u64> {
        if divides_bad(p) {
            crate::poly::roots::count_mod_p2(f, p)
        } else if let (2, Some(d), true) = (k, disc_small, p > 2) {
            // quadratic with p ∤ 2 a_2 Δ: 1 + (Δ/p) roots
            let d = d.rem_euclid(p as i128) as u64;
            Ok(if modp::powmod(d, (p - 1) / 2, p) == 1 { 2 } else { 0 })
        } else {
            Ok(modp::count_distinct_roots(&modp::trim(f.residues(p)), p) as u64)
        }
    };
    let rhos: Vec<u64> = if primes.len() > 256 {
        primes.par_iter().map(|&p| rho_p2(p)).collect::<Result<_>>()?
    } else {
        primes.iter().map(|&p| rho_p2(p)).collect::<Result<_>>()?
    };

    let mut value = Real::ONE;
    let mut zero_certified = false;
    for (&p, &r) in primes.iter().zip(&rhos) {
        let p2 = p * p;
        if r >= p2 {
            zero_certified = true;
        }
        value = value * Real::ratio(p2 - r.min(p2), p2);
    }

    // strip the included primes from a_k Δ_f to bound the unseen bad primes
    let mut rest = bad.clone();
    for &p in primes {
        if divides_bad(p) {
            while (&rest % p).is_zero() {
                rest /= p;
            }
        }
    }
    let bad_beyond = if rest.is_one() {
        0.0
    } else {
        let log2_rest = rest.bits() as f64; // >= log2(rest)
        (log2_rest / ((truncation + 1) as f64).log2()).floor().max(1.0)
    };
    let kf = k as f64;
    let tail_bound = kf / (truncation - 1) as f64 + kf * bad_beyond / truncation as f64;

    Ok(DensityResult {
        value,
        truncation,
        largest_prime: primes.last().copied().unwrap_or(0),
        tail_bound,
        rounding_bound: 4.0 * REAL_EPSILON * (primes.len() as f64 + 1.0),
        zero_certified,
        primes_used: primes.len(),
    })
}

/// `Σ_{d <= limit} μ(d) ρ_f(d^2) / d^2` with every `ρ_f(p^2)` taken from the
/// root-lifting path of [`rho`].
pub fn cf_partial_sum(f: &Polynomial, limit: u64) -> Result<Real> {
    if limit == 0 {
        return Err(Error::Domain("partial sum limit D must be >= 1".into()));
    }
    if limit >= 1 << 32 {
        return Err(Error::resource("partial sum limit", limit, "2^32"));
    }
    if !f.is_primitive() {
        return Err(Error::Domain(format!("density requires a primitive polynomial, got {f}")));
    }
    let mu = mobius_table(limit)?;
    let primes = sieve_primes(limit)?;
    let mut rho_sq = vec![0u64; limit as usize + 1];
    for &p in &primes {
        rho_sq[p as usize] = rho(f, p * p)?;
    }
    let mut sum = Real::ZERO;
    for d in 1..=limit {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        // d is square-free: ρ(d^2) = Π_{p | d} ρ(p^2)
        let mut r = 1u64;
        let mut rest = d;
        for &p in &primes {
            if p * p > rest {
                break;
            }
            if rest % p == 0 {
                r *= rho_sq[p as usize];
                rest /= p;
            }
        }
        if rest > 1 {
            r *= rho_sq[rest as usize];
        }
        if r == 0 {
            continue;
        }
        let term = Real::ratio(r, d * d);
        sum = if m > 0 { sum + term } else { sum - term };
    }
    Ok(sum)
}

/// `1/ζ(2) = 6/π^2`, used as the reference density of the identity polynomial.
pub fn inverse_zeta2() -> f64 {
    6.0 / (std::f64::consts::PI * std::f64::consts::PI)
}
