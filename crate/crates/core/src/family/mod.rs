//! The height-`H` families of primitive integer polynomials of degree `k`:
//! exhaustive enumeration, deterministic Monte Carlo sampling, and the
//! reducibility filter.

mod experiment;

pub use experiment::{
    average_error_experiment, error_records, squarefull_average_experiment, variance_experiment,
    AverageReport, DensityModel, ErrorRecord, ExperimentOptions, SquarefullAverage,
    DEFAULT_TRUNCATION,
};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Largest box `(2H+1)^{k+1}` an exhaustive run may walk by default.
pub const DEFAULT_FAMILY_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    pub k: usize,
    pub h: u64,
    pub mode: Mode,
    /// Admit `a_k = 0`, i.e. the literal family of all primitive vectors.
    pub allow_degenerate: bool,
    pub budget: u128,
}

impl FamilySpec {
    pub fn exhaustive(k: usize, h: u64) -> Self {
        FamilySpec {
            k,
            h,
            mode: Mode::Exhaustive,
            allow_degenerate: false,
            budget: DEFAULT_FAMILY_BUDGET,
        }
    }

    pub fn monte_carlo(k: usize, h: u64, samples: u64, seed: u64) -> Self {
        FamilySpec {
            mode: Mode::MonteCarlo { samples, seed },
            ..Self::exhaustive(k, h)
        }
    }

    /// `(2H+1)^{k+1}`, saturating.
    pub fn box_size(&self) -> u128 {
        (2 * self.h as u128 + 1).saturating_pow(self.k as u32 + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("family degree k must be >= 1".into()));
        }
        if self.h > i64::MAX as u64 / 2 {
            return Err(Error::resource("family height", self.h, i64::MAX / 2));
        }
        if let Mode::MonteCarlo { samples, .. } = self.mode {
            if samples == 0 {
                return Err(Error::Domain("Monte Carlo sample count must be >= 1".into()));
            }
            if self.h == 0 && !self.allow_degenerate {
                return Err(Error::Domain("height 0 family is empty".into()));
            }
        }
        Ok(())
    }

    /// Whether the coefficient vector belongs to the family.
    pub fn admits(&self, a: &[i64]) -> bool {
        (self.allow_degenerate || a[self.k] != 0) && a.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
    }

    /// The coefficient vector at `index` of the box in lexicographic order
    /// (`a_0` most significant, each coordinate running `-H..=H`).
    pub fn box_vector(&self, mut index: u128) -> Vec<i64> {
        let base = 2 * self.h as u128 + 1;
        let mut a = vec![0i64; self.k + 1];
        for slot in a.iter_mut().rev() {
            *slot = (index % base) as i64 - self.h as i64;
            index /= base;
        }
        a
    }
}

/// Polynomial with the given coefficient vector; the vector is primitive, so
/// never zero.
fn to_poly(a: &[i64]) -> Polynomial {
    Polynomial::from_i64(a).expect("primitive vector is non-zero")
}

/// Every family member, each exactly once, in lexicographic order of the
/// coefficient vector.
pub fn enumerate_family(spec: &FamilySpec) -> Result<impl Iterator<Item = Polynomial> + '_> {
    spec.validate()?;
    let size = spec.box_size();
    if size > spec.budget {
        return Err(Error::resource("exhaustive family", size, spec.budget));
    }
    Ok((0..size).filter_map(move |i| {
        let a = spec.box_vector(i);
        spec.admits(&a).then(|| to_poly(&a))
    }))
}

/// Draw `index` of a Monte Carlo stream, with the number of box draws it took.
///
/// Each index owns the ChaCha stream `index` under the run's seed, so a draw
/// depends only on `(seed, index)`.
pub fn sample_member(spec: &FamilySpec, seed: u64, index: u64) -> (Vec<i64>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let h = spec.h as i64;
    let mut draws = 0;
    loop {
        draws += 1;
        let a: Vec<i64> = (0..=spec.k).map(|_| rng.random_range(-h..=h)).collect();
        if spec.admits(&a) {
            return (a, draws);
        }
    }
}

/// The Monte Carlo stream: `samples` independent uniform members.
pub fn sample_family(spec: &FamilySpec) -> Result<impl Iterator<Item = Polynomial> + '_> {
    spec.validate()?;
    let Mode::MonteCarlo { samples, seed } = spec.mode else {
        return Err(Error::Precondition("sample_family needs Monte Carlo mode".into()));
    };
    Ok((0..samples).map(move |i| to_poly(&sample_member(spec, seed, i).0)))
}

/// Fraction of box draws accepted over the first `samples` members.
pub fn acceptance_rate(spec: &FamilySpec, seed: u64, samples: u64) -> f64 {
    let draws: u64 = (0..samples).map(|i| sample_member(spec, seed, i).1).sum();
    samples as f64 / draws as f64
}

/// Number of members, by Möbius inversion over the content:
/// `Σ_g μ(g) (#box(H/g) - #{a_k = 0 in box(H/g)})`, minus the zero vector.
pub fn family_size(k: usize, h: u64, allow_degenerate: bool) -> Result<u128> {
    let mu = crate::arith::mobius_table(h.max(1))?;
    let mut total: i128 = 0;
    for g in 1..=h {
        let m = mu[g as usize] as i128;
        if m == 0 {
            continue;
        }
        let side = 2 * (h / g) as i128 + 1;
        let count = if allow_degenerate {
            side.pow(k as u32 + 1) - 1
        } else {
            side.pow(k as u32 + 1) - side.pow(k as u32)
        };
        total += m * count;
    }
    Ok(total as u128)
}

/// Whether `f` factors over Q, for degree 2 or 3 (a rational root exists).
pub fn is_reducible(f: &Polynomial) -> Result<bool> {
    let k = f.degree();
    if !(2..=3).contains(&k) {
        return Err(Error::UnsupportedDegree {
            degree: k,
            reason: "reducibility is decided only for degrees 2 and 3",
        });
    }
    if !f.is_primitive() {
        return Err(Error::Domain(format!("{f} is not primitive")));
    }
    let c = f
        .small_coeffs()
        .ok_or_else(|| Error::resource("reducibility test coefficients", "> 2^63", "2^63"))?;
    if c[0] == 0 {
        return Ok(true);
    }
    let ps = divisors(c[0].unsigned_abs());
    let qs = divisors(c[k].unsigned_abs());
    for &q in &qs {
        for &p in &ps {
            if p.gcd(&q) != 1 {
                continue;
            }
            for sign in [1i128, -1] {
                // q^k f(p/q) = Σ c_i p^i q^{k-i}
                let (p, q) = (sign * p as i128, q as i128);
                let mut acc: i128 = 0;
                let mut ok = true;
                for (i, &ci) in c.iter().enumerate() {
                    let term = (ci as i128)
                        .checked_mul(p.pow(i as u32))
                        .and_then(|t| t.checked_mul(q.pow((k - i) as u32)));
                    match term.and_then(|t| acc.checked_add(t)) {
                        Some(v) => acc = v,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    return Err(Error::resource("rational root test", "i128 overflow", "i128"));
                }
                if acc == 0 {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(k: usize, h: i64, degenerate: bool) -> usize {
        let side = (2 * h + 1) as usize;
        let mut n = 0;
        for i in 0..side.pow(k as u32 + 1) {
            let mut a = Vec::new();
            let mut x = i;
            for _ in 0..=k {
                a.push((x % side) as i64 - h);
                x /= side;
            }
            let g = a.iter().fold(0i64, |g, &x| g.gcd(&x));
            if g == 1 && (degenerate || a[k] != 0) {
                n += 1;
            }
        }
        n
    }

    #[test]
    fn enumeration_examples() {
        let spec = FamilySpec::exhaustive(1, 1);
        let all: Vec<String> = enumerate_family(&spec).unwrap().map(|f| f.to_string()).collect();
        assert_eq!(all, vec!["-1,-1", "-1,1", "0,-1", "0,1", "1,-1", "1,1"]);
        assert_eq!(enumerate_family(&FamilySpec::exhaustive(2, 0)).unwrap().count(), 0);
        assert_eq!(enumerate_family(&FamilySpec::exhaustive(2, 1)).unwrap().count(), brute_count(2, 1, false));
    }

    #[test]
    fn closed_count_matches_brute_force() {
        for k in 1..=3 {
            for h in 1..=if k == 3 { 5 } else { 10 } {
                for degen in [false, true] {
                    assert_eq!(family_size(k, h, degen).unwrap() as usize, brute_count(k, h as i64, degen));
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut spec = FamilySpec::exhaustive(3, 100);
        spec.budget = 1000;
        assert!(matches!(enumerate_family(&spec), Err(Error::Resource { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_in_support() {
        let spec = FamilySpec::monte_carlo(1, 1, 100, 7);
        let a: Vec<_> = sample_family(&spec).unwrap().collect();
        let b: Vec<_> = sample_family(&spec).unwrap().collect();
        assert_eq!(a, b);
        let support: Vec<_> = enumerate_family(&FamilySpec::exhaustive(1, 1)).unwrap().collect();
        assert!(a.iter().all(|f| support.contains(f)));
        let ten = FamilySpec::monte_carlo(2, 50, 10, 123);
        assert_eq!(sample_family(&ten).unwrap().count(), 10);
    }

    #[test]
    fn acceptance_rate_near_inverse_zeta3() {
        let spec = FamilySpec::monte_carlo(2, 1_000_000, 10_000, 1);
        let rate = acceptance_rate(&spec, 1, 10_000);
        assert!((rate - 1.0 / 1.202_056_903_159_594).abs() < 0.02, "{rate}");
    }

    #[test]
    fn reducibility_examples() {
        let p = |c: &[i64]| Polynomial::from_i64(c).unwrap();
        assert!(is_reducible(&p(&[-1, 0, 1])).unwrap());
        assert!(!is_reducible(&p(&[1, 0, 1])).unwrap());
        assert!(!is_reducible(&p(&[-2, 0, 0, 1])).unwrap());
        assert!(is_reducible(&p(&[-1, 0, 0, 8])).unwrap()); // root 1/2
        assert!(is_reducible(&p(&[0, 3, 1])).unwrap());
        assert!(is_reducible(&p(&[2, -3, 0, 1])).unwrap()); // (X-1)^2 (X+2)
        assert!(matches!(
            is_reducible(&p(&[1, 0, 0, 0, 1])),
            Err(Error::UnsupportedDegree { degree: 4, .. })
        ));
    }

    #[test]
    fn reducible_fraction_decreases_with_height() {
        let frac = |h| {
            let spec = FamilySpec::exhaustive(2, h);
            let (mut red, mut all) = (0, 0);
            for f in enumerate_family(&spec).unwrap() {
                all += 1;
                red += is_reducible(&f).unwrap() as u32;
            }
            red as f64 / all as f64
        };
        let (a, b, c) = (frac(10), frac(30), frac(100));
        assert!(a > b && b > c, "{a} {b} {c}");
    }
}
