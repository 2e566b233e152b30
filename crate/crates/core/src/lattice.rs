//! The congruence lattices `Λ_{m,n} = {a ∈ Z^{k+1} : Σ a_i n^i ≡ 0 (mod m)}`,
//! their box point counts and sup-norm successive minima, and the counts
//! `U_k(m, H, N)` of primitive coefficient vectors of height `<= H` paired
//! with `1 <= n <= N` such that `m | f_a(n)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::arith::mobius_table;
use crate::error::{Error, Result};
use crate::poly::bareiss_determinant;
use crate::poly::modp::powmod;

/// Upper limit on residue-histogram work (`m * (2H+1) * k`) per box count.
pub const BOX_COUNT_BUDGET: u128 = 2_000_000_000;

/// Upper limit on the total residue-histogram work of one `U_k` evaluation.
pub const UK_BUDGET: u128 = 20_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeData {
    /// `s = k + 1`
    pub dimension: usize,
    pub modulus: u64,
    pub point: i64,
    /// Basis vectors as rows, coordinates `(a_0, ..., a_k)`.
    pub basis: Vec<Vec<i128>>,
    pub discriminant: u64,
    /// `n^i mod m` for `i = 0..=k`.
    #[serde(skip)]
    powers: Vec<u64>,
}

impl LatticeData {
    pub fn degree(&self) -> usize {
        self.dimension - 1
    }

    /// Whether `a` lies in the lattice.
    pub fn contains(&self, a: &[i128]) -> bool {
        let m = self.modulus as i128;
        let s: i128 = a
            .iter()
            .zip(&self.powers)
            .map(|(&x, &p)| x.rem_euclid(m) * p as i128 % m)
            .sum();
        s.rem_euclid(m) == 0
    }
}

/// Builds `Λ_{m,n}` in dimension `k + 1` and verifies its discriminant.
pub fn lattice_basis(m: u64, n: i64, k: usize) -> Result<LatticeData> {
    if m == 0 {
        return Err(Error::Domain("lattice modulus m must be >= 1".into()));
    }
    if k == 0 {
        return Err(Error::Domain("lattice degree k must be >= 1".into()));
    }
    let s = k + 1;
    let nm = (n as i128).rem_euclid(m as i128) as u64;
    let powers: Vec<u64> = (0..=k as u64).map(|i| powmod(nm, i, m)).collect();
    let mut basis = vec![vec![0i128; s]; s];
    basis[0][0] = m as i128;
    for i in 1..s {
        basis[i][0] = -(powers[i] as i128);
        basis[i][i] = 1;
    }
    let det = bareiss_determinant(
        basis
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
    );
    if det.abs() != BigInt::from(m) {
        return Err(Error::Internal(format!(
            "lattice determinant {det} differs from modulus {m}"
        )));
    }
    Ok(LatticeData {
        dimension: s,
        modulus: m,
        point: n,
        basis,
        discriminant: m,
        powers,
    })
}

/// `#{x ∈ [lo, hi] : x ≡ t (mod m)}`
fn count_in_interval(lo: i128, hi: i128, t: i128, m: i128) -> u128 {
    if hi < lo {
        return 0;
    }
    ((hi - t).div_euclid(m) - (lo - 1 - t).div_euclid(m)) as u128
}

/// Residue histogram of `Σ_{i>=1} a_i w_i mod m` over `a ∈ [-h, h]^k`.
fn residue_histogram(weights: &[u64], m: u64, h: u64) -> Vec<u128> {
    let mu = m as usize;
    let mut hist = vec![0u128; mu];
    hist[0] = 1;
    let width = 2 * h + 1;
    for &w in weights {
        // how many a ∈ [-h, h] give a * w ≡ r
        let mut step = vec![0u128; mu];
        if width >= m {
            let g = w.gcd(&m);
            // a*w runs over multiples of g; count per residue via the a-classes mod m/g
            let period = m / g;
            for a0 in 0..period {
                let r = (a0 as u128 * w as u128 % m as u128) as usize;
                step[r] += count_in_interval(-(h as i128), h as i128, a0 as i128, period as i128);
            }
        } else {
            for a in -(h as i128)..=(h as i128) {
                let r = (a * w as i128).rem_euclid(m as i128) as usize;
                step[r] += 1;
            }
        }
        let support: Vec<(usize, u128)> = step
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(r, &c)| (r, c))
            .collect();
        let mut next = vec![0u128; mu];
        for (r, &c) in hist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &(s, k) in &support {
                let idx = if r + s >= mu { r + s - mu } else { r + s };
                next[idx] += c * k;
            }
        }
        hist = next;
    }
    hist
}

fn box_count_raw(powers: &[u64], m: u64, h: u64) -> Result<u128> {
    let k = powers.len() - 1;
    let work = m as u128 * (2 * h as u128 + 1).min(m as u128) * k.max(1) as u128;
    if work > BOX_COUNT_BUDGET {
        return Err(Error::resource("box point count", work, BOX_COUNT_BUDGET));
    }
    if m == 1 {
        return Ok((2 * h as u128 + 1).pow(k as u32 + 1));
    }
    let hist = residue_histogram(&powers[1..], m, h);
    let (hi, mi) = (h as i128, m as i128);
    Ok(hist
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(c, &cnt)| cnt * count_in_interval(-hi, hi, (-(c as i128)).rem_euclid(mi), mi))
        .sum())
}

/// `#(Λ ∩ [-H, H]^s)`, exactly, by counting residue classes of the
/// non-constant coordinates.
pub fn count_box_points(lattice: &LatticeData, h: u64) -> Result<u128> {
    box_count_raw(&lattice.powers, lattice.modulus, h)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimaResult {
    /// Sup-norm successive minima, non-decreasing.
    pub lambdas: Vec<u64>,
    /// `λ_1`
    pub s_min: u64,
    /// The independent vectors realising each minimum.
    pub vectors: Vec<Vec<i128>>,
}

impl MinimaResult {
    pub fn product(&self) -> u128 {
        self.lambdas.iter().map(|&l| l as u128).product()
    }
}

/// Smallest `r` with `r^s >= m`.
pub fn ceil_root(m: u64, s: usize) -> u64 {
    let mut r = (m as f64).powf(1.0 / s as f64).floor() as u64;
    while (r as u128).pow(s as u32) >= m as u128 && r > 0 {
        r -= 1;
    }
    while (r as u128).pow(s as u32) < m as u128 {
        r += 1;
    }
    r
}

/// Echelon rows for exact independence tests, fraction-free over i128.
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn reduce(&self, v: &[i128]) -> Vec<i128> {
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            if v[*pivot] == 0 {
                continue;
            }
            let (a, b) = (row[*pivot], v[*pivot]);
            for (x, &y) in v.iter_mut().zip(row) {
                *x = *x * a - y * b;
            }
            let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
            if g > 1 {
                v.iter_mut().for_each(|x| *x /= g);
            }
        }
        v
    }

    /// For `s - 1` rows in `s` columns, reduced at each pivot: a nonzero
    /// integer vector orthogonal to all rows.
    fn normal(&self) -> Vec<i128> {
        let s = self.rows.len() + 1;
        let free = (0..s)
            .find(|c| self.rows.iter().all(|(p, _)| p != c))
            .expect("one free column");
        let l = self.rows.iter().fold(1i128, |l, (p, row)| l.lcm(&row[*p]));
        let mut n = vec![0i128; s];
        n[free] = l;
        for (p, row) in &self.rows {
            n[*p] = -(l / row[*p]) * row[free];
        }
        n
    }

    /// Adds `v` if it is independent of the current rows.
    fn insert(&mut self, v: &[i128]) -> bool {
        let r = self.reduce(v);
        match r.iter().position(|&x| x != 0) {
            Some(p) => {
                // keep rows reduced at this pivot
                for (_, row) in self.rows.iter_mut() {
                    if row[p] != 0 {
                        let (a, b) = (r[p], row[p]);
                        for (x, &y) in row.iter_mut().zip(&r) {
                            *x = *x * a - y * b;
                        }
                        let g = row.iter().fold(0i128, |g, &x| g.gcd(&x));
                        if g > 1 {
                            row.iter_mut().for_each(|x| *x /= g);
                        }
                    }
                }
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }
}

struct Walk {
    ech: Echelon,
    lambdas: Vec<u64>,
    vectors: Vec<Vec<i128>>,
    s: usize,
    /// Normal of the span once it is a hyperplane.
    normal: Option<Vec<i128>>,
}

impl Walk {
    /// Offers `(a0, t)` of norm `r`; true once `s` vectors are found.
    fn offer(&mut self, r: i128, a0: i128, t: &[i128]) -> bool {
        if let Some(nrm) = &self.normal {
            let dot: i128 = nrm[0] * a0 + nrm[1..].iter().zip(t).map(|(&x, &y)| x * y).sum::<i128>();
            if dot == 0 {
                return false;
            }
        }
        let mut v = Vec::with_capacity(self.s);
        v.push(a0);
        v.extend_from_slice(t);
        if self.ech.insert(&v) {
            self.lambdas.push(r as u64);
            self.vectors.push(v);
            if self.lambdas.len() + 1 == self.s {
                self.normal = Some(self.ech.normal());
            }
        }
        self.lambdas.len() == self.s
    }
}

/// Calls `f` on every point of the box `[lo, hi]` in odometer order until it
/// returns true. Returns whether it stopped early.
fn for_each_point(lo: &[i128], hi: &[i128], mut f: impl FnMut(&[i128]) -> bool) -> bool {
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return false;
    }
    let mut t = lo.to_vec();
    loop {
        if f(&t) {
            return true;
        }
        let mut i = 0;
        loop {
            if i == t.len() {
                return false;
            }
            if t[i] < hi[i] {
                t[i] += 1;
                break;
            }
            t[i] = lo[i];
            i += 1;
        }
    }
}

/// Sup-norm successive minima by walking shells `||v||_∞ = r = 1, 2, ...`.
///
/// `search_bound` must be at least `ceil(m^{1/s})`, which guarantees `λ_1` is
/// reached; the walk then continues until `s` independent vectors are found,
/// which happens by `r = m` at the latest since `m e_i ∈ Λ`.
pub fn successive_minima(lattice: &LatticeData, search_bound: u64) -> Result<MinimaResult> {
    let s = lattice.dimension;
    let m = lattice.modulus;
    let needed = ceil_root(m, s);
    if search_bound < needed {
        return Err(Error::Precondition(format!(
            "search bound {search_bound} is below ceil(m^(1/s)) = {needed}"
        )));
    }
    let k = s - 1;
    let weights: Vec<i128> = lattice.powers[1..].iter().map(|&w| w as i128).collect();
    let mi = m as i128;
    // Interior points are solved for the last coordinate:
    // t_last * w ≡ c (mod m) iff g | c, then t_last ≡ (c/g) inv (mod m/g).
    let w_last = weights[k - 1];
    let g = w_last.gcd(&mi);
    let step = mi / g;
    let inv = if step == 1 {
        0
    } else {
        (w_last / g).extended_gcd(&step).x.rem_euclid(step)
    };
    let mut walk = Walk {
        ech: Echelon { rows: Vec::new() },
        lambdas: Vec::with_capacity(s),
        vectors: Vec::with_capacity(s),
        s,
        normal: None,
    };
    let mut r: i128 = 0;
    while walk.lambdas.len() < s {
        r += 1;
        if r > mi {
            return Err(Error::Internal("successive minima walk exceeded m".into()));
        }
        let class_of = |t: &[i128]| -> i128 {
            let c: i128 = t.iter().zip(&weights).map(|(&x, &w)| x * w).sum();
            (-c).rem_euclid(mi)
        };
        // |t|_∞ = r, a_0 anywhere in [-r, r]
        'shell: for j in 0..k {
            for edge in [-r, r] {
                let mut lo = vec![-r; k];
                let mut hi = vec![r; k];
                for i in 0..j {
                    lo[i] = -r + 1;
                    hi[i] = r - 1;
                }
                lo[j] = edge;
                hi[j] = edge;
                let done = for_each_point(&lo, &hi, |t| {
                    let class = class_of(t);
                    let mut a0 = -r + (class + r).rem_euclid(mi);
                    while a0 <= r {
                        if walk.offer(r, a0, t) {
                            return true;
                        }
                        a0 += mi;
                    }
                    false
                });
                if done {
                    break 'shell;
                }
            }
        }
        if walk.lambdas.len() == s {
            break;
        }
        // |t|_∞ < r, a_0 = ±r
        for a0 in [-r, r] {
            let lo = vec![-r + 1; k - 1];
            let hi = vec![r - 1; k - 1];
            let done = for_each_point(&lo, &hi, |head| {
                let partial: i128 = head.iter().zip(&weights).map(|(&x, &w)| x * w).sum();
                let c = (-a0 - partial).rem_euclid(mi);
                if c % g != 0 {
                    return false;
                }
                let base = (c / g * inv).rem_euclid(step);
                let mut last = -r + 1 + (base - (-r + 1)).rem_euclid(step);
                let mut t = head.to_vec();
                t.push(0);
                while last < r {
                    t[k - 1] = last;
                    if walk.offer(r, a0, &t) {
                        return true;
                    }
                    last += step;
                }
                false
            });
            if done {
                break;
            }
        }
    }
    let Walk { lambdas, vectors, .. } = walk;
    Ok(MinimaResult {
        s_min: lambdas[0],
        lambdas,
        vectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UkCount {
    pub m: u64,
    pub h: u64,
    pub n: u64,
    pub k: usize,
    pub count: u128,
}

/// `U_k(m, H, N)`: pairs `(a, n)` with `a ∈ [-H, H]^{k+1}` primitive,
/// `1 <= n <= N` and `m | Σ a_i n^i`.
///
/// Primitivity is handled by Möbius inversion over the content `g`: vectors
/// divisible by `g` are `g b` with `|b_i| <= H/g`, and `m | g (b·n)` iff
/// `m / gcd(m, g) | b·n`, a box count in `Λ_{m/gcd(m,g), n}` minus the zero
/// vector.
pub fn count_uk(m: u64, h: u64, n: u64, k: usize) -> Result<UkCount> {
    if m == 0 || h == 0 || n == 0 || k == 0 {
        return Err(Error::Domain("U_k needs m, H, N, k >= 1".into()));
    }
    let work = n as u128 * m as u128 * (2 * h as u128 + 1) * k as u128
        * (1 + (h as f64).ln().ceil() as u128);
    if work > UK_BUDGET {
        return Err(Error::resource("U_k evaluation", work, UK_BUDGET));
    }
    let mu = mobius_table(h)?;
    let mut total: i128 = 0;
    for point in 1..=n {
        for g in 1..=h {
            let sign = mu[g as usize];
            if sign == 0 {
                continue;
            }
            let mg = m / m.gcd(&g);
            let nm = point % mg;
            let powers: Vec<u64> = (0..=k as u64).map(|i| powmod(nm, i, mg)).collect();
            let c = box_count_raw(&powers, mg, h / g)? as i128 - 1;
            total += sign as i128 * c;
        }
    }
    Ok(UkCount {
        m,
        h,
        n,
        k,
        count: total.to_u128().expect("non-negative count"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicSum {
    pub q: u64,
    pub h: u64,
    pub n: u64,
    pub k: usize,
    /// `(q, U_k(q^2, H, N))` for square-free `q ∈ (Q/2, Q]`.
    pub terms: Vec<(u64, u128)>,
    pub sum: u128,
    /// `H^{k+1}N/Q + NQ + H^k + H^k N Q^{2/(k+1)}`
    pub lemma_rhs: f64,
    pub ratio: f64,
}

/// `Σ_{Q/2 < q <= Q} μ^2(q) U_k(q^2, H, N)` with the evaluated bound shape.
pub fn dyadic_uk_sum(q: u64, h: u64, n: u64, k: usize) -> Result<DyadicSum> {
    if q == 0 {
        return Err(Error::Domain("Q must be >= 1".into()));
    }
    if q >= 1 << 32 {
        return Err(Error::resource("dyadic range Q", q, "2^32"));
    }
    let mu = mobius_table(q)?;
    // q > Q/2  <=>  2q > Q
    let lo = q / 2 + 1;
    let mut terms = Vec::new();
    let mut sum = 0u128;
    for x in lo..=q {
        if mu[x as usize] == 0 {
            continue;
        }
        let u = count_uk(x * x, h, n, k)?.count;
        terms.push((x, u));
        sum += u;
    }
    let (hf, nf, qf, kf) = (h as f64, n as f64, q as f64, k as i32);
    let lemma_rhs = hf.powi(kf + 1) * nf / qf
        + nf * qf
        + hf.powi(kf)
        + hf.powi(kf) * nf * qf.powf(2.0 / (kf as f64 + 1.0));
    Ok(DyadicSum {
        q,
        h,
        n,
        k,
        terms,
        sum,
        lemma_rhs,
        ratio: sum as f64 / lemma_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_box(l: &LatticeData, h: i128) -> u128 {
        let s = l.dimension;
        let mut count = 0;
        let mut a = vec![-h; s];
        loop {
            if l.contains(&a) {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == s {
                    return count;
                }
                if a[i] < h {
                    a[i] += 1;
                    break;
                }
                a[i] = -h;
                i += 1;
            }
        }
    }

    fn brute_uk(m: u64, h: i64, n: u64, k: usize) -> u128 {
        let mut count = 0;
        let mut a = vec![-h; k + 1];
        loop {
            let g = a.iter().fold(0i64, |g, &x| g.gcd(&x));
            if g == 1 {
                for x in 1..=n as i128 {
                    let v: i128 = a.iter().rev().fold(0i128, |acc, &c| acc * x + c as i128);
                    if v.rem_euclid(m as i128) == 0 {
                        count += 1;
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == a.len() {
                    return count;
                }
                if a[i] < h {
                    a[i] += 1;
                    break;
                }
                a[i] = -h;
                i += 1;
            }
        }
    }

    #[test]
    fn basis_examples() {
        let l = lattice_basis(4, 1, 1).unwrap();
        assert_eq!(l.basis, vec![vec![4, 0], vec![-1, 1]]);
        assert_eq!(l.discriminant, 4);
        assert_eq!(lattice_basis(1, 5, 2).unwrap().discriminant, 1);
        assert_eq!(lattice_basis(9, 3, 2).unwrap().discriminant, 9);
        let l = lattice_basis(7, -3, 3).unwrap();
        for row in &l.basis {
            assert!(l.contains(row));
        }
    }

    #[test]
    fn box_count_examples() {
        let full = lattice_basis(1, 4, 2).unwrap();
        assert_eq!(count_box_points(&full, 1).unwrap(), 27);
        let l = lattice_basis(4, 1, 1).unwrap();
        assert_eq!(count_box_points(&l, 1).unwrap(), 3);
        assert_eq!(count_box_points(&l, 4).unwrap(), brute_box(&l, 4));
    }

    #[test]
    fn box_count_matches_brute_force() {
        for m in [2u64, 3, 6, 9, 12, 25, 49] {
            for n in [-2i64, 0, 1, 3, 7] {
                for k in 1..=3 {
                    let l = lattice_basis(m, n, k).unwrap();
                    for h in [1u64, 2, 5] {
                        if (2 * h + 1).pow(k as u32 + 1) > 200_000 {
                            continue;
                        }
                        assert_eq!(
                            count_box_points(&l, h).unwrap(),
                            brute_box(&l, h as i128),
                            "m={m} n={n} k={k} h={h}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn minima_examples() {
        let l = lattice_basis(4, 1, 1).unwrap();
        assert_eq!(successive_minima(&l, 2).unwrap().lambdas, vec![1, 2]);
        let l = lattice_basis(1, 3, 3).unwrap();
        assert_eq!(successive_minima(&l, 1).unwrap().lambdas, vec![1, 1, 1, 1]);
        let l = lattice_basis(9, 0, 1).unwrap();
        let r = successive_minima(&l, 3).unwrap();
        assert_eq!(r.lambdas, vec![1, 9]);
        assert_eq!(r.s_min, 1);
        assert!(matches!(successive_minima(&l, 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn minima_vectors_are_lattice_vectors() {
        let l = lattice_basis(97, 5, 2).unwrap();
        let r = successive_minima(&l, 5).unwrap();
        for (v, &lam) in r.vectors.iter().zip(&r.lambdas) {
            assert!(l.contains(v));
            assert_eq!(v.iter().map(|x| x.unsigned_abs()).max().unwrap() as u64, lam);
        }
        assert!(r.product() <= 97 && r.product() * 6 >= 97);
    }

    #[test]
    fn uk_examples() {
        assert_eq!(count_uk(4, 1, 2, 1).unwrap().count, 2);
        assert_eq!(count_uk(1, 1, 1, 1).unwrap().count, 8);
        assert_eq!(count_uk(2, 1, 1, 1).unwrap().count, brute_uk(2, 1, 1, 1));
        assert_eq!(count_uk(2, 1, 1, 1).unwrap().count, 4);
    }

    #[test]
    fn uk_matches_brute_force_small() {
        for m in [1u64, 3, 4, 8, 9, 12] {
            for h in 1..=3 {
                assert_eq!(count_uk(m, h, 3, 2).unwrap().count, brute_uk(m, h as i64, 3, 2));
            }
        }
    }

    #[test]
    fn dyadic_examples() {
        assert_eq!(dyadic_uk_sum(2, 1, 2, 1).unwrap().sum, 2);
        let d = dyadic_uk_sum(1, 1, 1, 1).unwrap();
        assert_eq!(d.sum, 8);
        let d = dyadic_uk_sum(3, 1, 1, 1).unwrap();
        assert_eq!(d.terms.iter().map(|t| t.0).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(d.sum, brute_uk(4, 1, 1, 1) + brute_uk(9, 1, 1, 1));
    }
}
