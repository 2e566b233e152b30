//! Exact integer arithmetic: primes, factorization, Möbius and Mertens
//! functions, square-free and square-full predicates.

mod factor;
mod sieve;

pub use factor::{
    factorize, factorize_u64, is_prime, is_prime_u64, is_squarefree, is_squarefree_u64,
    is_squarefull, is_squarefull_u64, mobius, Factorization,
};
pub use sieve::{mobius_table, sieve_primes, SIEVE_BUDGET};


use serde::Serialize;

use crate::error::{Error, Result};

/// A Mertens-type sum `Σ_{d ≤ limit, gcd(d, modulus) = 1} μ(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MertensReport {
    pub limit: u64,
    /// 1 means unrestricted.
    pub modulus: u64,
    pub value: i64,
}

/// Sums μ(d) over `d <= limit` coprime to `modulus`, from a sieved μ table.
pub fn mertens(limit: u64, modulus: u64) -> Result<MertensReport> {
    if limit == 0 || modulus == 0 {
        return Err(Error::Domain("mertens requires D >= 1 and n >= 1".into()));
    }
    let mu = mobius_table(limit)?;
    let value = if modulus == 1 {
        mu.iter().map(|&m| m as i64).sum()
    } else {
        let primes: Vec<u64> = factorize_u64(modulus).into_iter().map(|(p, _)| p).collect();
        let mut coprime = vec![true; mu.len()];
        for &p in &primes {
            let mut j = p as usize;
            while j < coprime.len() {
                coprime[j] = false;
                j += p as usize;
            }
        }
        mu.iter()
            .zip(&coprime)
            .filter(|(_, &c)| c)
            .map(|(&m, _)| m as i64)
            .sum()
    };
    Ok(MertensReport {
        limit,
        modulus,
        value,
    })
}

/// Running Mertens values `M(0..=limit)`.
pub fn mertens_prefix(limit: u64) -> Result<Vec<i64>> {
    let mu = mobius_table(limit)?;
    let mut acc = 0i64;
    Ok(mu
        .iter()
        .map(|&m| {
            acc += m as i64;
            acc
        })
        .collect())
}

/// `Σ_{d: d^2 | n} μ(d)`, evaluated by walking `d <= sqrt(n)`.
pub fn square_divisor_mobius_sum(n: u64, mu: &[i8]) -> i64 {
    let mut s = 0i64;
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d * d) {
            s += mu[d as usize] as i64;
        }
        d += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mertens_examples() {
        assert_eq!(mertens(10, 1).unwrap().value, -1);
        assert_eq!(mertens(1, 1).unwrap().value, 1);
        assert_eq!(mertens(10, 2).unwrap().value, -2);
        assert!(mertens(0, 1).is_err());
    }

    #[test]
    fn mertens_direct_summation() {
        // Oracle: μ by factorization, summed directly.
        for n in [1u64, 2, 6, 10, 12, 35] {
            for limit in [1u64, 7, 50, 121] {
                let direct: i64 = (1..=limit)
                    .filter(|d| num_integer::gcd(*d, n) == 1)
                    .map(|d| mobius(d).unwrap() as i64)
                    .sum();
                assert_eq!(mertens(limit, n).unwrap().value, direct);
            }
        }
    }

    #[test]
    fn table_matches_single_queries() {
        let mu = mobius_table(5_000).unwrap();
        for n in 1..=5_000u64 {
            assert_eq!(mu[n as usize], mobius(n).unwrap());
        }
    }

    #[test]
    fn bounded_by_limit() {
        let prefix = mertens_prefix(10_000).unwrap();
        for (d, &m) in prefix.iter().enumerate().skip(1) {
            assert!(m.unsigned_abs() <= d as u64);
        }
    }

    #[test]
    fn squarefull_of_squarefree_is_one() {
        for n in 1..3_000u64 {
            if is_squarefree_u64(n) {
                assert_eq!(is_squarefull_u64(n), n == 1);
            }
        }
    }
}
