//! Dense polynomial arithmetic over F_p, `p` an odd or even prime below 2^63.
//! Polynomials are coefficient vectors, constant term first, with no
//! trailing zeros (the zero polynomial is the empty vector).

pub(crate) type PolyP = Vec<u64>;

#[inline]
pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    (a as u128 * b as u128 % p as u128) as u64
}

pub(crate) fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

/// Inverse of a unit modulo any `m` (extended Euclid).
pub(crate) fn invmod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

pub(crate) fn trim(mut a: PolyP) -> PolyP {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn degree(a: &PolyP) -> Option<usize> {
    a.len().checked_sub(1)
}

/// Quotient and remainder of `a / b`, `b` non-zero.
pub(crate) fn divrem(a: &PolyP, b: &PolyP, p: u64) -> (PolyP, PolyP) {
    let db = degree(b).expect("division by zero polynomial");
    let mut r = a.clone();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let lead_inv = invmod(b[db], p).expect("prime modulus");
    let mut q = vec![0u64; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = mulmod(r[i], lead_inv, p);
        if c == 0 {
            continue;
        }
        q[i - db] = c;
        for (j, &bj) in b.iter().enumerate() {
            let t = mulmod(c, bj, p);
            let idx = i - db + j;
            r[idx] = (r[idx] + p - t) % p;
        }
    }
    r.truncate(db);
    (trim(q), trim(r))
}

pub(crate) fn rem(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    divrem(a, b, p).1
}

fn mul(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    trim(out)
}

fn mulrem(a: &PolyP, b: &PolyP, m: &PolyP, p: u64) -> PolyP {
    rem(&mul(a, b, p), m, p)
}

/// `base^e mod m`.
fn powrem(base: &PolyP, mut e: u64, m: &PolyP, p: u64) -> PolyP {
    let mut acc = rem(&vec![1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulrem(&acc, &b, m, p);
        }
        b = mulrem(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn gcd(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    monic(a, p)
}

fn monic(a: PolyP, p: u64) -> PolyP {
    match a.last() {
        None => a,
        Some(&l) => {
            let inv = invmod(l, p).expect("prime modulus");
            a.into_iter().map(|c| mulmod(c, inv, p)).collect()
        }
    }
}

fn sub(a: &PolyP, b: &PolyP, p: u64) -> PolyP {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

/// `gcd(f, X^p - X)`: the product of the distinct linear factors of `f`.
/// `f` must be non-zero mod p.
pub(crate) fn split_part(f: &PolyP, p: u64) -> PolyP {
    debug_assert!(!f.is_empty());
    if f.len() == 1 {
        return vec![1];
    }
    let f = monic(f.clone(), p);
    let xp = powrem(&vec![0, 1], p, &f, p);
    let xp_minus_x = sub(&xp, &vec![0, 1], p);
    if xp_minus_x.is_empty() {
        return f;
    }
    gcd(&f, &xp_minus_x, p)
}

/// Number of distinct roots of `f` in F_p.
pub(crate) fn count_distinct_roots(f: &PolyP, p: u64) -> usize {
    split_part(f, p).len() - 1
}

/// All distinct roots of `f` in F_p, ascending, for odd `p`, by
/// equal-degree splitting of `gcd(f, X^p - X)`.
pub(crate) fn distinct_roots(f: &PolyP, p: u64) -> Vec<u64> {
    let g = split_part(f, p);
    let mut roots = Vec::with_capacity(g.len().saturating_sub(1));
    split_linear(g, p, &mut roots);
    roots.sort_unstable();
    roots
}

fn split_linear(g: PolyP, p: u64, out: &mut Vec<u64>) {
    match g.len() {
        0 | 1 => {}
        2 => {
            // g = X + c (monic)
            out.push((p - g[0]) % p);
        }
        _ => {
            if g[0] == 0 {
                out.push(0);
                let (q, _) = divrem(&g, &vec![0, 1], p);
                split_linear(q, p, out);
                return;
            }
            let half = (p - 1) / 2;
            // shifts a = 1, 2, ... give a deterministic splitting sequence
            for a in 1..p {
                let h = powrem(&vec![a, 1], half, &g, p);
                let h = sub(&h, &vec![1], p);
                if h.is_empty() {
                    continue;
                }
                let d = gcd(&g, &h, p);
                if d.len() > 1 && d.len() < g.len() {
                    let (q, _) = divrem(&g, &d, p);
                    split_linear(d, p, out);
                    split_linear(monic(q, p), p, out);
                    return;
                }
            }
            unreachable!("equal-degree splitting failed for a squarefree product of linears");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse() {
        assert_eq!(invmod(3, 7), Some(5));
        assert_eq!(invmod(2, 4), None);
        assert_eq!(invmod(7, 25), Some(18));
    }

    #[test]
    fn roots_of_split_polynomial() {
        let p = 1_000_003u64;
        // (X - 5)(X - 17)(X - 999_999)(X^2 + 1)?  p ≡ 3 mod 4 so X^2+1 is irreducible
        let lin = |r: u64| vec![(p - r) % p, 1];
        let f = mul(&mul(&mul(&lin(5), &lin(17), p), &lin(999_999), p), &vec![1, 0, 1], p);
        assert_eq!(count_distinct_roots(&f, p), 3);
        assert_eq!(distinct_roots(&f, p), vec![5, 17, 999_999]);
    }

    #[test]
    fn repeated_and_zero_roots() {
        let p = 10_007u64;
        // X^2 (X - 3)^2
        let f = mul(&vec![0, 0, 1], &mul(&vec![p - 3, 1], &vec![p - 3, 1], p), p);
        assert_eq!(distinct_roots(&f, p), vec![0, 3]);
    }
}
