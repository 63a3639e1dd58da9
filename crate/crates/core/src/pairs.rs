//! Exhaustive pairwise separation checks: given values `v_0, …, v_N` and a
//! constraint `c`, find every `a < b` with `|v_a - v_b| < c(b - a)`.
//!
//! All values are first scaled to integers over their common denominator, so
//! each pair costs one subtraction, one multiplication and one comparison.
//! When everything fits, the scaled integers are `i128`; otherwise the same
//! kernel runs on `BigInt`. Either way the answer is exact.

use std::ops::{Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generic_proxinv::ConstraintFunction;
use crate::rational::ExactRational;

pub const DEFAULT_MAX_PAIRS: u128 = 100_000_000;

/// Number of `a` values handed to a worker at a time.
const BLOCK: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Upper bound on the number of unordered pairs a single check may visit.
    pub max_pairs: u128,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_pairs: DEFAULT_MAX_PAIRS,
            workers: default_workers(),
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Unordered pairs in `0..=max`.
pub fn pair_count(max: u64) -> u128 {
    let n = max as u128 + 1;
    n * (n - 1) / 2
}

impl VerifyOptions {
    pub fn with_workers(workers: usize) -> Self {
        VerifyOptions {
            workers: workers.max(1),
            ..Default::default()
        }
    }

    pub fn check_pair_budget(&self, max: u64) -> Result<()> {
        let pairs = pair_count(max);
        if pairs > self.max_pairs {
            return Err(Error::ResourceBound {
                what: "pair count",
                requested: pairs,
                limit: self.max_pairs,
            });
        }
        Ok(())
    }
}

/// A pair that is closer in value than the constraint allows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub a: u64,
    pub b: u64,
    /// `|v_a - v_b|`
    pub gap: ExactRational,
    /// `c(b - a)`
    pub required: ExactRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationReport {
    /// Inclusive range of points, `(0, N)`.
    pub range_checked: (u64, u64),
    pub constraint: String,
    /// Sorted by `(a, b)`.
    pub violations: Vec<Violation>,
    pub pairs_checked: u128,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Integer arithmetic the kernel needs; implemented for `i128` and `BigInt`.
trait Scaled: Clone + Ord + Signed + Send + Sync
where
    for<'a> &'a Self: Sub<&'a Self, Output = Self> + Mul<&'a Self, Output = Self>,
{
}

impl Scaled for i128 {}
impl Scaled for BigInt {}

struct Problem<T> {
    /// `v_a · D`
    values: Vec<T>,
    /// index `n`: `D · p_n` where `c(n) = p_n / q_n`; index 0 unused
    required: Vec<T>,
    /// index `n`: `q_n`
    denominators: Vec<T>,
}

/// Checks every pair of `values` (index = point) against `constraint`.
///
/// `sink` sees each violation in `(a, b)` order; with several workers the
/// range is processed in waves of blocks and each finished wave is emitted in
/// order, so the stream and the final report do not depend on `workers`.
pub fn check_pairs(
    values: &[ExactRational],
    constraint: &ConstraintFunction,
    opts: &VerifyOptions,
    sink: impl FnMut(&Violation),
) -> Result<ViolationReport> {
    check_pairs_impl(values, constraint, opts, sink, false)
}

fn check_pairs_impl(
    values: &[ExactRational],
    constraint: &ConstraintFunction,
    opts: &VerifyOptions,
    sink: impl FnMut(&Violation),
    force_bigint: bool,
) -> Result<ViolationReport> {
    if values.is_empty() {
        return Err(Error::precondition("no points to check"));
    }
    let max = values.len() as u64 - 1;
    opts.check_pair_budget(max)?;
    let table = constraint.table_up_to(max);

    let mut common = BigInt::one();
    for v in values.iter().chain(&table) {
        common = common.lcm(v.denom());
    }
    let scale = |q: &ExactRational| q.numer() * (&common / q.denom());
    let values_big: Vec<BigInt> = values.iter().map(scale).collect();
    let mut required_big = vec![BigInt::from(0)];
    let mut denominators_big = vec![BigInt::one()];
    for c in &table {
        required_big.push(c.numer() * &common);
        denominators_big.push(c.denom().clone());
    }

    let fits = |xs: &[BigInt], bits: u64| xs.iter().all(|x| x.bits() <= bits);
    let small = !force_bigint
        && fits(&values_big, 62)
        && fits(&denominators_big, 62)
        && fits(&required_big, 126);

    let report_base = ViolationReport {
        range_checked: (0, max),
        constraint: constraint.description().to_string(),
        violations: Vec::new(),
        pairs_checked: pair_count(max),
    };
    let exact = Exact { values, table: &table };
    let violations = if small {
        let narrow = |xs: Vec<BigInt>| -> Vec<i128> {
            xs.iter().map(|x| i128::try_from(x).expect("checked bit length")).collect()
        };
        let problem = Problem {
            values: narrow(values_big),
            required: narrow(required_big),
            denominators: narrow(denominators_big),
        };
        drive(&problem, &exact, opts.workers, sink)
    } else {
        let problem = Problem {
            values: values_big,
            required: required_big,
            denominators: denominators_big,
        };
        drive(&problem, &exact, opts.workers, sink)
    };
    Ok(ViolationReport {
        violations,
        ..report_base
    })
}

/// Rational inputs, used only to build the reported gap and requirement.
struct Exact<'a> {
    values: &'a [ExactRational],
    table: &'a [ExactRational],
}

impl Exact<'_> {
    fn violation(&self, a: u64, b: u64) -> Violation {
        let gap = (&self.values[b as usize] - &self.values[a as usize]).abs();
        Violation {
            a,
            b,
            gap,
            required: self.table[(b - a - 1) as usize].clone(),
        }
    }
}

fn scan_block<T: Scaled>(problem: &Problem<T>, exact: &Exact<'_>, lo: u64, hi: u64) -> Vec<Violation>
where
    for<'a> &'a T: Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let max = problem.values.len() as u64 - 1;
    let mut out = Vec::new();
    for a in lo..hi {
        let va = &problem.values[a as usize];
        for b in a + 1..=max {
            let n = (b - a) as usize;
            let gap = (&problem.values[b as usize] - va).abs();
            if &gap * &problem.denominators[n] < problem.required[n] {
                out.push(exact.violation(a, b));
            }
        }
    }
    out
}

fn drive<T: Scaled>(
    problem: &Problem<T>,
    exact: &Exact<'_>,
    workers: usize,
    mut sink: impl FnMut(&Violation),
) -> Vec<Violation>
where
    for<'a> &'a T: Sub<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let points = problem.values.len() as u64;
    let blocks: Vec<(u64, u64)> = (0..points)
        .step_by(BLOCK as usize)
        .map(|lo| (lo, (lo + BLOCK).min(points)))
        .collect();
    let mut all = Vec::new();
    let mut emit = |found: Vec<Violation>, all: &mut Vec<Violation>| {
        for v in &found {
            sink(v);
        }
        all.extend(found);
    };

    if workers <= 1 || blocks.len() <= 1 {
        for &(lo, hi) in &blocks {
            emit(scan_block(problem, exact, lo, hi), &mut all);
        }
        return all;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to start worker pool");
    for wave in blocks.chunks(workers * 4) {
        let results: Vec<Vec<Violation>> = pool.install(|| {
            wave.par_iter()
                .map(|&(lo, hi)| scan_block(problem, exact, lo, hi))
                .collect()
        });
        for found in results {
            emit(found, &mut all);
        }
    }
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    /// Direct rational comparison of every pair.
    fn naive(values: &[ExactRational], c: &ConstraintFunction) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for a in 0..values.len() {
            for b in a + 1..values.len() {
                let gap = (&values[b] - &values[a]).abs();
                if gap < c.evaluate((b - a) as u64).unwrap() {
                    out.push((a as u64, b as u64));
                }
            }
        }
        out
    }

    fn arb_values() -> impl Strategy<Value = Vec<ExactRational>> {
        proptest::collection::vec((0i64..50, 1i64..12).prop_map(|(n, d)| ratio(n, d)), 1..90)
    }

    fn arb_constraint() -> impl Strategy<Value = ConstraintFunction> {
        prop_oneof![
            Just(ConstraintFunction::reciprocal()),
            (0i64..5, 1i64..4).prop_map(|(n, d)| ConstraintFunction::scaled_reciprocal(ratio(n, d)).unwrap()),
            (0i64..3, 1i64..5).prop_map(|(n, d)| ConstraintFunction::constant(ratio(n, d)).unwrap()),
            Just(ConstraintFunction::table(vec![ratio(3, 1), ratio(2, 1), ratio(2, 3)], ratio(1, 7)).unwrap()),
        ]
    }

    #[test]
    fn pair_counts() {
        assert_eq!(pair_count(0), 0);
        assert_eq!(pair_count(3), 6);
        assert_eq!(pair_count(2000), 2_001_000);
    }

    #[test]
    fn budget_is_enforced() {
        let opts = VerifyOptions {
            max_pairs: 5,
            workers: 1,
        };
        let values = vec![ratio(0, 1); 4];
        let err = check_pairs(&values, &ConstraintFunction::reciprocal(), &opts, |_| {}).unwrap_err();
        assert_eq!(
            err,
            Error::ResourceBound {
                what: "pair count",
                requested: 6,
                limit: 5
            }
        );
    }

    #[test]
    fn huge_denominators_take_the_bigint_path() {
        let big = BigInt::from(10).pow(40u32);
        let values: Vec<ExactRational> = (0..20)
            .map(|i| ExactRational::new(BigInt::from(i * i), big.clone() + i))
            .collect();
        let c = ConstraintFunction::constant(ratio(0, 1)).unwrap();
        let report = check_pairs(&values, &c, &VerifyOptions::with_workers(1), |_| {}).unwrap();
        assert!(report.is_clean());
        let c = ConstraintFunction::reciprocal();
        let report = check_pairs(&values, &c, &VerifyOptions::with_workers(3), |_| {}).unwrap();
        let found: Vec<_> = report.violations.iter().map(|v| (v.a, v.b)).collect();
        assert_eq!(found, naive(&values, &c));
    }

    proptest! {
        #[test]
        fn matches_direct_comparison(values in arb_values(), c in arb_constraint(), workers in 1usize..5) {
            let expected = naive(&values, &c);
            for force in [false, true] {
                let mut streamed = Vec::new();
                let opts = VerifyOptions { max_pairs: DEFAULT_MAX_PAIRS, workers };
                let report = check_pairs_impl(&values, &c, &opts, |v| streamed.push((v.a, v.b)), force).unwrap();
                let found: Vec<_> = report.violations.iter().map(|v| (v.a, v.b)).collect();
                prop_assert_eq!(&found, &expected);
                prop_assert_eq!(&streamed, &expected);
                prop_assert_eq!(report.pairs_checked, pair_count(values.len() as u64 - 1));
                for v in &report.violations {
                    prop_assert!(v.gap < v.required);
                    prop_assert_eq!(&v.gap, &(&values[v.b as usize] - &values[v.a as usize]).abs());
                }
            }
        }
    }
}
