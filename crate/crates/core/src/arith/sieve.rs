//! Prime and Möbius sieves.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest argument accepted by the table-building sieves.
pub const SIEVE_BUDGET: u64 = 1 << 32;

/// Returns all primes `p <= limit` in ascending order.
///
/// Odd-only sieve of Eratosthenes; `limit < 2` yields an empty list.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit > SIEVE_BUDGET {
        return Err(Error::resource("prime sieve limit", limit, SIEVE_BUDGET));
    }
    if limit < 2 {
        return Ok(Vec::new());
    }
    let limit = limit as usize;
    // composite[i] describes the odd number 2i + 1
    let half = limit.div_ceil(2);
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_pi(limit));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| !c)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    Ok(primes)
}

fn estimate_pi(x: usize) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()) as usize
}

/// Primes below 2^16, built once and shared by the factorizer.
pub(crate) fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve_primes(1 << 16).expect("within budget"))
}

/// Möbius values `mu[0..=limit]` (with `mu[0] = 0`) by a linear sieve.
pub fn mobius_table(limit: u64) -> Result<Vec<i8>> {
    if limit > SIEVE_BUDGET {
        return Err(Error::resource("Möbius sieve limit", limit, SIEVE_BUDGET));
    }
    let n = limit as usize;
    let mut mu = vec![0i8; n + 1];
    if n == 0 {
        return Ok(mu);
    }
    mu[1] = 1;
    let mut is_comp = vec![false; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    for i in 2..=n {
        if !is_comp[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            is_comp[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_limits() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert_eq!(
            sieve_primes(30).unwrap(),
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
        );
        assert!(sieve_primes(1).unwrap().is_empty());
    }

    #[test]
    fn prime_counts() {
        assert_eq!(sieve_primes(1_000).unwrap().len(), 168);
        assert_eq!(sieve_primes(1_000_000).unwrap().len(), 78_498);
        assert_eq!(small_primes().len(), 6_542);
    }

    #[test]
    fn over_budget() {
        assert!(matches!(
            sieve_primes(SIEVE_BUDGET + 1),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn mobius_prefix() {
        let mu = mobius_table(12).unwrap();
        assert_eq!(&mu[1..], &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }
}
