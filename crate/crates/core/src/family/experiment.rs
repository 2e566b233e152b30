//! Averages of `S_f(N) - c_f N` and of square-full counts over a family.
//!
//! Work is split into fixed blocks of member slots; each block is summed in
//! slot order and the block sums are combined pairwise in block order, so the
//! floating-point result is the same for any number of worker threads.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::{is_reducible, sample_member, FamilySpec, Mode};
use crate::arith::{is_squarefree, is_squarefree_u64, is_squarefull, is_squarefull_u64, sieve_primes};
use crate::counting::{magnitude, Magnitude};
use crate::density::cf_truncated_with_primes;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::real::Real;

/// Default truncation `P` of the density inside experiments.
pub const DEFAULT_TRUNCATION: u64 = 1_000;

/// Member slots per reduction block.
const BLOCK: u128 = 1_024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DensityModel {
    /// `c_f` truncated at the given prime bound.
    Truncated(u64),
    /// A constant stand-in for every `c_f` (placebo comparisons).
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentOptions {
    pub density: DensityModel,
    pub exclude_reducible: bool,
    /// Permit heights below the default range guard.
    pub allow_out_of_range: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            density: DensityModel::Truncated(DEFAULT_TRUNCATION),
            exclude_reducible: false,
            allow_out_of_range: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub spec: FamilySpec,
    pub n: u64,
    pub options: ExperimentOptions,
    /// Family members visited.
    pub members: u64,
    pub count_used: u64,
    /// `Σ S_f(N)` over the members used.
    pub total_count: u64,
    pub mean_error: f64,
    pub mean_abs_error: f64,
    pub cancellation_ratio: f64,
    pub second_moment: f64,
    pub mean_density: f64,
    pub reducible_excluded: u64,
    pub skipped_vanishing: u64,
    pub skipped_repeated_factor: u64,
    /// Members with `a_k = 0` among those used.
    pub degenerate_used: u64,
    pub max_tail_bound: f64,
    /// `N * max_tail_bound`: the truncation uncertainty of `mean_error`.
    pub error_bar: f64,
    /// The height is below the default guard.
    pub out_of_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub index: u64,
    pub coefficients: String,
    pub status: &'static str,
    pub count: Option<u64>,
    pub density: Option<f64>,
    pub error: Option<f64>,
}

enum Outcome {
    Vanishing,
    Repeated,
    Reducible,
    Used {
        count: u64,
        density: f64,
        error: Real,
        tail: f64,
        degenerate: bool,
    },
}

#[derive(Clone, Copy, Default)]
struct Partial {
    members: u64,
    used: u64,
    total_count: u64,
    sum_err: Real,
    sum_abs: Real,
    sum_sq: Real,
    sum_density: Real,
    reducible: u64,
    vanishing: u64,
    repeated: u64,
    degenerate: u64,
    max_tail: f64,
}

impl Partial {
    fn add(&mut self, o: &Outcome) {
        self.members += 1;
        match *o {
            Outcome::Vanishing => self.vanishing += 1,
            Outcome::Repeated => self.repeated += 1,
            Outcome::Reducible => self.reducible += 1,
            Outcome::Used {
                count,
                density,
                error,
                tail,
                degenerate,
            } => {
                self.used += 1;
                self.total_count += count;
                self.sum_err = self.sum_err + error;
                self.sum_abs = self.sum_abs + error.abs();
                self.sum_sq = self.sum_sq + error * error;
                self.sum_density = self.sum_density + Real::from_f64(density);
                self.degenerate += degenerate as u64;
                self.max_tail = self.max_tail.max(tail);
            }
        }
    }

    fn merge(a: Partial, b: Partial) -> Partial {
        Partial {
            members: a.members + b.members,
            used: a.used + b.used,
            total_count: a.total_count + b.total_count,
            sum_err: a.sum_err + b.sum_err,
            sum_abs: a.sum_abs + b.sum_abs,
            sum_sq: a.sum_sq + b.sum_sq,
            sum_density: a.sum_density + b.sum_density,
            reducible: a.reducible + b.reducible,
            vanishing: a.vanishing + b.vanishing,
            repeated: a.repeated + b.repeated,
            degenerate: a.degenerate + b.degenerate,
            max_tail: a.max_tail.max(b.max_tail),
        }
    }
}

/// Index-ordered pairwise reduction.
fn pairwise<T: Copy + Default>(items: &[T], merge: fn(T, T) -> T) -> T {
    match items.len() {
        0 => T::default(),
        1 => items[0],
        n => {
            let (l, r) = items.split_at(n / 2);
            merge(pairwise(l, merge), pairwise(r, merge))
        }
    }
}

/// Slot addressing shared by the exhaustive and Monte Carlo modes.
struct Slots<'a> {
    spec: &'a FamilySpec,
    len: u128,
}

impl<'a> Slots<'a> {
    fn new(spec: &'a FamilySpec) -> Result<Self> {
        spec.validate()?;
        let len = match spec.mode {
            Mode::Exhaustive => {
                let size = spec.box_size();
                if size > spec.budget {
                    return Err(Error::resource("exhaustive family", size, spec.budget));
                }
                size
            }
            Mode::MonteCarlo { samples, .. } => samples as u128,
        };
        Ok(Slots { spec, len })
    }

    fn member(&self, i: u128) -> Option<Vec<i64>> {
        match self.spec.mode {
            Mode::Exhaustive => {
                let a = self.spec.box_vector(i);
                self.spec.admits(&a).then_some(a)
            }
            Mode::MonteCarlo { seed, .. } => Some(sample_member(self.spec, seed, i as u64).0),
        }
    }

    /// Folds every member through `visit` block by block.
    fn fold<P, F>(&self, visit: F) -> Result<Vec<P>>
    where
        P: Default + Send,
        F: Fn(&mut P, u128, Vec<i64>) -> Result<()> + Sync,
    {
        let blocks = self.len.div_ceil(BLOCK) as u64;
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut part = P::default();
                let lo = b as u128 * BLOCK;
                let hi = (lo + BLOCK).min(self.len);
                for i in lo..hi {
                    if let Some(a) = self.member(i) {
                        visit(&mut part, i, a)?;
                    }
                }
                Ok(part)
            })
            .collect()
    }
}

/// Number of `n <= N` with `|f(n)|` passing the test, or `None` if `f`
/// vanishes somewhere on `[1, N]`.
fn count_values(
    f: &Polynomial,
    n: u64,
    small: fn(u64) -> bool,
    big: fn(&num_bigint::BigUint) -> Result<bool>,
) -> Result<Option<u64>> {
    let mut count = 0;
    for x in 1..=n {
        let hit = match magnitude(f, x).0 {
            Magnitude::Small(0) => return Ok(None),
            Magnitude::Small(v) => small(v),
            Magnitude::Big(v) => big(&v)?,
        };
        count += hit as u64;
    }
    Ok(Some(count))
}

struct Evaluator {
    n: u64,
    options: ExperimentOptions,
    primes: Vec<u64>,
}

impl Evaluator {
    fn new(spec: &FamilySpec, n: u64, options: ExperimentOptions) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be >= 1".into()));
        }
        if options.exclude_reducible && !(2..=3).contains(&spec.k) {
            return Err(Error::UnsupportedDegree {
                degree: spec.k,
                reason: "reducibility is decided only for degrees 2 and 3",
            });
        }
        let primes = match options.density {
            DensityModel::Truncated(p) => {
                if p < 2 {
                    return Err(Error::Domain("density truncation P must be >= 2".into()));
                }
                sieve_primes(p)?
            }
            DensityModel::Constant(c) => {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::Domain(format!("constant density {c} outside [0, 1]")));
                }
                Vec::new()
            }
        };
        Ok(Evaluator { n, options, primes })
    }

    fn evaluate(&self, a: &[i64], k: usize) -> Result<Outcome> {
        let f = Polynomial::from_i64(a)?;
        let Some(count) = count_values(&f, self.n, is_squarefree_u64, is_squarefree)? else {
            return Ok(Outcome::Vanishing);
        };
        if f.degree() >= 2 && f.discriminant() == num_bigint::BigInt::ZERO {
            return Ok(Outcome::Repeated);
        }
        if self.options.exclude_reducible && f.degree() >= 2 && is_reducible(&f)? {
            return Ok(Outcome::Reducible);
        }
        let (density, real, tail) = match self.options.density {
            DensityModel::Truncated(p) => {
                let d = cf_truncated_with_primes(&f, p, &self.primes)?;
                (d.value.to_f64(), d.value, d.tail_bound)
            }
            DensityModel::Constant(c) => (c, Real::from_f64(c), 0.0),
        };
        let error = Real::from_u64(count) - real * Real::from_u64(self.n);
        Ok(Outcome::Used {
            count,
            density,
            error,
            tail,
            degenerate: a[k] == 0,
        })
    }
}

/// Smallest `h` with `h^2 >= x`.
fn ceil_sqrt_u128(x: u128) -> u128 {
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

fn range_guard(spec: &FamilySpec, lower: Option<u128>, allow: bool, what: &str) -> Result<bool> {
    let Some(lower) = lower else {
        return if allow {
            Ok(true)
        } else {
            Err(Error::Precondition(format!("{what} lower bound on H overflows")))
        };
    };
    let out = (spec.h as u128) < lower;
    if out && !allow {
        return Err(Error::Precondition(format!(
            "H = {} is below the default range H >= {what} = {lower}; pass the out-of-range flag to run anyway",
            spec.h
        )));
    }
    Ok(out)
}

/// Average of `S_f(N) - c_f N` over the family, with its absolute mean and
/// second moment. Requires `H >= N^{k+1}` unless out-of-range runs are
/// allowed.
pub fn average_error_experiment(
    spec: &FamilySpec,
    n: u64,
    options: ExperimentOptions,
) -> Result<AverageReport> {
    let lower = (n as u128).checked_pow(spec.k as u32 + 1);
    let out_of_range = range_guard(spec, lower, options.allow_out_of_range, "N^(k+1)")?;
    let slots = Slots::new(spec)?;
    let eval = Evaluator::new(spec, n, options)?;
    let parts: Vec<Partial> = slots.fold(|part: &mut Partial, _, a| {
        part.add(&eval.evaluate(&a, spec.k)?);
        Ok(())
    })?;
    let t = pairwise(&parts, Partial::merge);
    let used = t.used.max(1) as f64;
    let (mean_error, mean_abs_error, second_moment, mean_density) = if t.used == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (
            t.sum_err.to_f64() / used,
            t.sum_abs.to_f64() / used,
            t.sum_sq.to_f64() / used,
            t.sum_density.to_f64() / used,
        )
    };
    let cancellation_ratio = if mean_abs_error > 0.0 {
        (mean_error.abs() / mean_abs_error).min(1.0)
    } else {
        0.0
    };
    Ok(AverageReport {
        spec: *spec,
        n,
        options,
        members: t.members,
        count_used: t.used,
        total_count: t.total_count,
        mean_error,
        mean_abs_error,
        cancellation_ratio,
        second_moment: second_moment.max(mean_error * mean_error),
        mean_density,
        reducible_excluded: t.reducible,
        skipped_vanishing: t.vanishing,
        skipped_repeated_factor: t.repeated,
        degenerate_used: t.degenerate,
        max_tail_bound: t.max_tail,
        error_bar: n as f64 * t.max_tail,
        out_of_range,
    })
}

/// The second-moment experiment; identical aggregation, read for
/// `second_moment`.
pub fn variance_experiment(spec: &FamilySpec, n: u64, options: ExperimentOptions) -> Result<AverageReport> {
    average_error_experiment(spec, n, options)
}

/// Per-member outcomes in slot order, for CSV dumps.
pub fn error_records(spec: &FamilySpec, n: u64, options: ExperimentOptions) -> Result<Vec<ErrorRecord>> {
    let slots = Slots::new(spec)?;
    let eval = Evaluator::new(spec, n, options)?;
    let parts: Vec<Vec<ErrorRecord>> = slots.fold(|out: &mut Vec<ErrorRecord>, i, a| {
        let coefficients = a.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
        let rec = |status, count, density, error| ErrorRecord {
            index: i as u64,
            coefficients: coefficients.clone(),
            status,
            count,
            density,
            error,
        };
        out.push(match eval.evaluate(&a, spec.k)? {
            Outcome::Vanishing => rec("vanishing", None, None, None),
            Outcome::Repeated => rec("repeated_factor", None, None, None),
            Outcome::Reducible => rec("reducible", None, None, None),
            Outcome::Used {
                count,
                density,
                error,
                ..
            } => rec("used", Some(count), Some(density), Some(error.to_f64())),
        });
        Ok(())
    })?;
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquarefullAverage {
    pub spec: FamilySpec,
    pub n: u64,
    pub members: u64,
    pub count_used: u64,
    pub skipped_vanishing: u64,
    /// `Σ_f S^■_f(N)`
    pub total: u64,
    /// `total / count_used` in lowest terms.
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
    pub out_of_range: bool,
}

impl SquarefullAverage {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new_raw(self.numerator, self.denominator)
    }
}

#[derive(Clone, Copy, Default)]
struct SfPartial {
    members: u64,
    used: u64,
    vanishing: u64,
    total: u64,
}

/// Exact average of the square-full count `S^■_f(N)` over a quadratic
/// family. Requires `H >= ceil(N^{5/2})` unless out-of-range runs are
/// allowed.
pub fn squarefull_average_experiment(
    spec: &FamilySpec,
    n: u64,
    allow_out_of_range: bool,
) -> Result<SquarefullAverage> {
    if spec.k != 2 {
        return Err(Error::UnsupportedDegree {
            degree: spec.k,
            reason: "the square-full average is defined for quadratic families",
        });
    }
    if n == 0 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    let lower = (n as u128).checked_pow(5).map(ceil_sqrt_u128);
    let out_of_range = range_guard(spec, lower, allow_out_of_range, "ceil(N^(5/2))")?;
    let slots = Slots::new(spec)?;
    let parts: Vec<SfPartial> = slots.fold(|part: &mut SfPartial, _, a| {
        part.members += 1;
        let f = Polynomial::from_i64(&a)?;
        match count_values(&f, n, is_squarefull_u64, is_squarefull)? {
            Some(c) => {
                part.used += 1;
                part.total += c;
            }
            None => part.vanishing += 1,
        }
        Ok(())
    })?;
    let t = pairwise(&parts, |a, b| SfPartial {
        members: a.members + b.members,
        used: a.used + b.used,
        vanishing: a.vanishing + b.vanishing,
        total: a.total + b.total,
    });
    let r = if t.used == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(t.total, t.used)
    };
    Ok(SquarefullAverage {
        spec: *spec,
        n,
        members: t.members,
        count_used: t.used,
        skipped_vanishing: t.vanishing,
        total: t.total,
        numerator: *r.numer(),
        denominator: *r.denom(),
        value: *r.numer() as f64 / *r.denom() as f64,
        out_of_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::cf_truncated;

    #[test]
    fn range_guard_applies() {
        let spec = FamilySpec::exhaustive(2, 5);
        assert!(matches!(
            average_error_experiment(&spec, 3, ExperimentOptions::default()),
            Err(Error::Precondition(_))
        ));
        let opts = ExperimentOptions {
            allow_out_of_range: true,
            ..Default::default()
        };
        assert!(average_error_experiment(&spec, 3, opts).unwrap().out_of_range);
        assert!(matches!(
            squarefull_average_experiment(&spec, 2, false),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn small_family_matches_direct_recomputation() {
        let spec = FamilySpec::exhaustive(2, 4);
        let opts = ExperimentOptions {
            density: DensityModel::Truncated(100),
            exclude_reducible: false,
            allow_out_of_range: true,
        };
        let r = average_error_experiment(&spec, 2, opts).unwrap();
        let (mut used, mut sum, mut sq, mut vanish, mut rep) = (0u64, 0.0, 0.0, 0, 0);
        for f in super::super::enumerate_family(&spec).unwrap() {
            let vals: Vec<i128> = (1..=2).map(|x| f.eval_i128(x).unwrap()).collect();
            if vals.contains(&0) {
                vanish += 1;
                continue;
            }
            if f.discriminant() == 0.into() {
                rep += 1;
                continue;
            }
            let s = vals.iter().filter(|v| is_squarefree_u64(v.unsigned_abs() as u64)).count();
            let c = cf_truncated(&f, 100).unwrap().value.to_f64();
            let e = s as f64 - 2.0 * c;
            used += 1;
            sum += e;
            sq += e * e;
        }
        assert_eq!(r.count_used, used);
        assert_eq!(r.skipped_vanishing, vanish);
        assert_eq!(r.skipped_repeated_factor, rep);
        assert!((r.mean_error - sum / used as f64).abs() < 1e-12);
        assert!((r.second_moment - sq / used as f64).abs() < 1e-12);
        assert!(r.second_moment >= r.mean_error * r.mean_error);
        assert!(r.mean_abs_error >= r.mean_error.abs());
    }

    #[test]
    fn n_equals_one_second_moment() {
        let spec = FamilySpec::exhaustive(2, 3);
        let opts = ExperimentOptions {
            density: DensityModel::Truncated(50),
            ..Default::default()
        };
        let r = variance_experiment(&spec, 1, opts).unwrap();
        let mut acc = 0.0;
        let mut n = 0;
        for f in super::super::enumerate_family(&spec).unwrap() {
            let v = f.eval_i128(1).unwrap();
            if v == 0 || f.discriminant() == 0.into() {
                continue;
            }
            let s = is_squarefree_u64(v.unsigned_abs() as u64) as u64 as f64;
            let c = cf_truncated(&f, 50).unwrap().value.to_f64();
            acc += (s - c) * (s - c);
            n += 1;
        }
        assert!((r.second_moment - acc / n as f64).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let spec = FamilySpec::monte_carlo(3, 100, 500, 42);
        let opts = ExperimentOptions {
            density: DensityModel::Truncated(200),
            exclude_reducible: true,
            allow_out_of_range: false,
        };
        let a = average_error_experiment(&spec, 2, opts).unwrap();
        let b = average_error_experiment(&spec, 2, opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.members, 500);
        assert!(a.reducible_excluded > 0);
        let records = error_records(&spec, 2, opts).unwrap();
        assert_eq!(records.len(), 500);
        assert_eq!(records.iter().filter(|r| r.status == "used").count() as u64, a.count_used);
    }

    #[test]
    fn squarefull_small_family() {
        let spec = FamilySpec::exhaustive(2, 2);
        let r = squarefull_average_experiment(&spec, 1, false).unwrap();
        let mut total = 0;
        let mut used = 0;
        for f in super::super::enumerate_family(&spec).unwrap() {
            let v = f.eval_i128(1).unwrap();
            if v != 0 {
                used += 1;
                total += is_squarefull_u64(v.unsigned_abs() as u64) as u64;
            }
        }
        assert_eq!(r.ratio(), Ratio::new(total, used));
    }
}
