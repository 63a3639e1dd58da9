//! The proximity inversion function `f(a) = Σ d_i / F_{2i}` built from the
//! even-Fibonacci representation of `a`, its two digit-order characterizations,
//! exhaustive verification that it separates pairs by `1 / |a - b|`, and its
//! supremum.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fib_core::{below_golden_ratio, fib};
use crate::generic_proxinv::ConstraintFunction;
use crate::numeration::{decode_fib, encode_fib, DigitString};
use crate::pairs::{check_pairs, VerifyOptions, Violation, ViolationReport};
use crate::rational::{reciprocal, ExactRational, Natural};

pub use crate::pairs::{pair_count, DEFAULT_MAX_PAIRS};

/// `Σ x[i] / F_{2i}` for a digit string in the even-Fibonacci system.
pub fn f_of_digits(x: &DigitString) -> ExactRational {
    x.digits()
        .iter()
        .enumerate()
        .filter(|(_, d)| **d != 0)
        .map(|(i, d)| ExactRational::new(BigInt::from(*d), BigInt::from(fib(2 * (i + 1)))))
        .sum()
}

pub fn f_value(a: &Natural) -> ExactRational {
    f_of_digits(&encode_fib(a))
}

/// `f(0), …, f(max)`.
pub fn f_values_up_to(max: u64) -> Vec<ExactRational> {
    (0..=max).map(|a| f_value(&Natural::from(a))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderingVerdict {
    pub relation: Ordering,
    /// 1-based position of the deciding digit; `None` when the inputs are equal.
    pub witness_position: Option<usize>,
}

fn verdict_at(x: &DigitString, y: &DigitString, position: Option<usize>) -> OrderingVerdict {
    match position {
        None => OrderingVerdict {
            relation: Ordering::Equal,
            witness_position: None,
        },
        Some(l) => OrderingVerdict {
            relation: x.get(l).cmp(&y.get(l)),
            witness_position: Some(l),
        },
    }
}

/// Decides by the highest position where `x` and `y` differ (zero-padded).
pub fn compare_digits_from_top(x: &DigitString, y: &DigitString) -> OrderingVerdict {
    let len = x.len().max(y.len());
    let l = (1..=len).rev().find(|&l| x.get(l) != y.get(l));
    verdict_at(x, y, l)
}

/// Decides by the lowest position where `x` and `y` differ (zero-padded).
pub fn compare_digits_from_bottom(x: &DigitString, y: &DigitString) -> OrderingVerdict {
    let len = x.len().max(y.len());
    let l = (1..=len).find(|&l| x.get(l) != y.get(l));
    verdict_at(x, y, l)
}

/// Orders `a` and `b` through their representations: the most significant
/// differing digit decides.
pub fn compare_by_value(a: &Natural, b: &Natural) -> OrderingVerdict {
    compare_digits_from_top(&encode_fib(a), &encode_fib(b))
}

/// Orders `f(a)` and `f(b)` without evaluating `f`: the *least* significant
/// differing digit decides.
pub fn compare_by_f(a: &Natural, b: &Natural) -> OrderingVerdict {
    compare_digits_from_bottom(&encode_fib(a), &encode_fib(b))
}

/// Checks `|f(a) - f(b)| >= c(b - a)` for every `0 <= a < b <= max`.
pub fn verify_range(max: u64, constraint: &ConstraintFunction, opts: &VerifyOptions) -> Result<ViolationReport> {
    verify_range_streaming(max, constraint, opts, |_| {})
}

/// [`verify_range`], handing each violation to `sink` in `(a, b)` order as it
/// is found.
pub fn verify_range_streaming(
    max: u64,
    constraint: &ConstraintFunction,
    opts: &VerifyOptions,
    sink: impl FnMut(&Violation),
) -> Result<ViolationReport> {
    opts.check_pair_budget(max)?;
    check_pairs(&f_values_up_to(max), constraint, opts, sink)
}

fn require_positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::precondition(format!("{what} requires n >= 1")));
    }
    Ok(())
}

/// The string `2 1^{n-1}`, i.e. `[2, 1, …, 1]`.
pub fn top_string(n: usize) -> DigitString {
    let mut digits = vec![1; n];
    if n > 0 {
        digits[0] = 2;
    }
    DigitString::new(digits)
}

/// The maximizer of `f` over integers of length at most `n` and its value.
///
/// Among strings of length `<= n` the winner is `2 1^{n-1}`: at the lowest
/// position where any competitor differs, the competitor's digit is smaller.
pub fn max_f_up_to_length(n: usize) -> Result<(Natural, ExactRational)> {
    require_positive(n, "max_f_up_to_length")?;
    let x = top_string(n);
    Ok((decode_fib(&x), f_of_digits(&x)))
}

/// `Σ_{i=1}^{n} 1/F_{2i}`.
pub fn reciprocal_basis_sum(n: usize) -> ExactRational {
    (1..=n).map(|i| reciprocal(&fib(2 * i))).sum()
}

/// `1 + Σ_{i=1}^{n} 1/F_{2i}`, the maximum of `f` over lengths `<= n`.
pub fn supremum_partial(n: usize) -> Result<ExactRational> {
    require_positive(n, "supremum_partial")?;
    Ok(ExactRational::one() + reciprocal_basis_sum(n))
}

/// Whether `Σ_{i=1}^{n} 1/F_{2i} < φ`, decided exactly; when it holds the
/// partial supremum is below `1 + φ`.
pub fn partial_sum_below_golden_ratio(n: usize) -> Result<bool> {
    require_positive(n, "partial_sum_below_golden_ratio")?;
    Ok(below_golden_ratio(&reciprocal_basis_sum(n)))
}

/// Pairs `a < b <= max` that meet the constraint `1/(b - a)` with equality.
pub fn tight_pairs(max: u64) -> Vec<(u64, u64)> {
    let values = f_values_up_to(max);
    let mut out = Vec::new();
    for a in 0..=max {
        for b in a + 1..=max {
            let gap = &values[b as usize] - &values[a as usize];
            let gap = if gap < ExactRational::zero() { -gap } else { gap };
            if gap == reciprocal(&Natural::from(b - a)) {
                out.push((a, b));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeration::{enumerate_valid, ValidityRule};
    use crate::rational::ratio;

    fn nat(n: u64) -> Natural {
        Natural::from(n)
    }

    #[test]
    fn f_examples() {
        assert_eq!(f_value(&nat(0)), ratio(0, 1));
        assert_eq!(f_value(&nat(5)), ratio(7, 3));
        assert_eq!(f_value(&nat(13)), ratio(59, 24));
        let first: Vec<_> = (0..4).map(|a| f_value(&nat(a))).collect();
        assert_eq!(first, vec![ratio(0, 1), ratio(1, 1), ratio(2, 1), ratio(1, 3)]);
    }

    #[test]
    fn compare_examples() {
        let v = compare_by_value(&nat(5), &nat(7));
        assert_eq!((v.relation, v.witness_position), (Ordering::Less, Some(2)));
        let v = compare_by_value(&nat(4), &nat(4));
        assert_eq!((v.relation, v.witness_position), (Ordering::Equal, None));
        let v = compare_by_value(&nat(3), &nat(2));
        assert_eq!((v.relation, v.witness_position), (Ordering::Greater, Some(2)));

        let v = compare_by_f(&nat(2), &nat(3));
        assert_eq!((v.relation, v.witness_position), (Ordering::Greater, Some(1)));
        let v = compare_by_f(&nat(3), &nat(4));
        assert_eq!((v.relation, v.witness_position), (Ordering::Less, Some(1)));
        let v = compare_by_f(&nat(9), &nat(9));
        assert_eq!((v.relation, v.witness_position), (Ordering::Equal, None));
    }

    #[test]
    fn orderings_agree_on_small_range() {
        let f = f_values_up_to(400);
        for a in 0..=400u64 {
            for b in 0..=400u64 {
                assert_eq!(compare_by_value(&nat(a), &nat(b)).relation, a.cmp(&b));
                assert_eq!(compare_by_f(&nat(a), &nat(b)).relation, f[a as usize].cmp(&f[b as usize]));
            }
        }
    }

    #[test]
    fn verify_small_ranges() {
        let c = ConstraintFunction::reciprocal();
        let opts = VerifyOptions::with_workers(1);
        let r = verify_range(0, &c, &opts).unwrap();
        assert_eq!((r.pairs_checked, r.violations.len()), (0, 0));
        let r = verify_range(3, &c, &opts).unwrap();
        assert_eq!((r.pairs_checked, r.violations.len()), (6, 0));
        assert_eq!(r.range_checked, (0, 3));
        let r = verify_range(500, &c, &VerifyOptions::with_workers(4)).unwrap();
        assert_eq!((r.pairs_checked, r.violations.len()), (125_250, 0));
    }

    #[test]
    fn verify_reports_violations_for_a_stronger_constraint() {
        let c = ConstraintFunction::scaled_reciprocal(ratio(2, 1)).unwrap();
        let one = verify_range(60, &c, &VerifyOptions::with_workers(1)).unwrap();
        let many = verify_range(60, &c, &VerifyOptions::with_workers(4)).unwrap();
        assert!(!one.violations.is_empty());
        assert_eq!(one, many);
        // f(3) = 1/3, f(4) = 4/3 differ by exactly 1 < 2
        assert!(one.violations.iter().any(|v| (v.a, v.b) == (3, 4)));
    }

    #[test]
    fn verify_respects_pair_budget() {
        let opts = VerifyOptions {
            max_pairs: 1000,
            workers: 1,
        };
        let err = verify_range(100, &ConstraintFunction::reciprocal(), &opts).unwrap_err();
        assert!(matches!(err, Error::ResourceBound { requested: 5050, limit: 1000, .. }));
    }

    #[test]
    fn tightness_is_attained() {
        let tight = tight_pairs(100);
        assert!(tight.contains(&(3, 4)));
        assert!(tight.contains(&(0, 1)));
    }

    #[test]
    fn maximizer_examples() {
        assert_eq!(max_f_up_to_length(1).unwrap(), (nat(2), ratio(2, 1)));
        assert_eq!(max_f_up_to_length(2).unwrap(), (nat(5), ratio(7, 3)));
        assert_eq!(max_f_up_to_length(3).unwrap(), (nat(13), ratio(59, 24)));
        assert!(max_f_up_to_length(0).is_err());
    }

    #[test]
    fn supremum_examples() {
        assert_eq!(supremum_partial(1).unwrap(), ratio(2, 1));
        assert_eq!(supremum_partial(4).unwrap(), ratio(421, 168));
        assert!(supremum_partial(0).is_err());
    }

    #[test]
    fn maximizer_matches_enumeration() {
        for n in 1..=8 {
            let best = enumerate_valid(n, ValidityRule::Fib, 16)
                .unwrap()
                .iter()
                .map(f_of_digits)
                .max()
                .unwrap();
            let (_, value) = max_f_up_to_length(n).unwrap();
            assert_eq!(value, best);
            assert_eq!(value, supremum_partial(n).unwrap());
        }
    }

    #[test]
    fn partial_sums_stay_below_golden_ratio() {
        for n in 1..=100 {
            assert!(partial_sum_below_golden_ratio(n).unwrap(), "n = {n}");
            assert!(supremum_partial(n).unwrap() < supremum_partial(n + 1).unwrap());
        }
    }
}
