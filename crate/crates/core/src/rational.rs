//! Exact number types and their human-readable rendering.
//!
//! Verdicts are always computed on [`ExactRational`] values. The decimal
//! rendering in this module exists for display only.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

/// Reduced fraction of arbitrary-precision integers with a positive denominator.
pub type ExactRational = BigRational;

/// Significant digits used by [`to_decimal`].
pub const DECIMAL_DIGITS: usize = 12;

pub fn natural_to_rational(n: &Natural) -> ExactRational {
    ExactRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// `1 / n`. Panics on `n = 0`.
pub fn reciprocal(n: &Natural) -> ExactRational {
    assert!(!n.is_zero(), "reciprocal of zero");
    ExactRational::new(BigInt::one(), BigInt::from_biguint(Sign::Plus, n.clone()))
}

pub fn ratio(numer: i64, denom: i64) -> ExactRational {
    ExactRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `p/q`, `p` or `-p/q`. The result is reduced.
pub fn parse_rational(text: &str) -> Result<ExactRational> {
    let bad = || Error::Config(format!("`{text}` is not a rational number (expected p or p/q)"));
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Config(format!("`{text}` has a zero denominator")));
    }
    Ok(ExactRational::new(num, den))
}

/// `p/q` with `q > 0`, or just `p` when the value is an integer.
pub fn to_fraction_string(q: &ExactRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn pow10(e: u32) -> BigUint {
    BigUint::from(10u32).pow(e)
}

/// Compares `a` with `b * 10^e`.
fn cmp_scaled(a: &BigUint, b: &BigUint, e: i64) -> Ordering {
    if e >= 0 {
        a.cmp(&(b * pow10(e as u32)))
    } else {
        (a * pow10((-e) as u32)).cmp(b)
    }
}

/// Renders `q` with [`DECIMAL_DIGITS`] significant digits, rounding half to
/// even. Magnitudes outside `[1e-7, 1e21)` use scientific notation.
pub fn to_decimal(q: &ExactRational) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let negative = q.is_negative();
    let num = q.numer().abs().to_biguint().expect("absolute value");
    let den = q.denom().to_biguint().expect("denominator is positive");

    // 10^e <= num/den < 10^(e+1)
    let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
    if cmp_scaled(&num, &den, e) == Ordering::Less {
        e -= 1;
    }

    let shift = DECIMAL_DIGITS as i64 - 1 - e;
    let (scaled_num, scaled_den) = if shift >= 0 {
        (num * pow10(shift as u32), den)
    } else {
        (num, den * pow10((-shift) as u32))
    };
    let (mut mantissa, rem) = scaled_num.div_rem(&scaled_den);
    let twice = rem << 1u32;
    match twice.cmp(&scaled_den) {
        Ordering::Greater => mantissa += 1u32,
        Ordering::Equal if mantissa.is_odd() => mantissa += 1u32,
        _ => {}
    }
    if mantissa == pow10(DECIMAL_DIGITS as u32) {
        mantissa = pow10(DECIMAL_DIGITS as u32 - 1);
        e += 1;
    }

    let digits = mantissa.to_string();
    debug_assert_eq!(digits.len(), DECIMAL_DIGITS);
    let body = if (-7..21).contains(&e) {
        if e < 0 {
            format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
        } else if (e as usize) < DECIMAL_DIGITS - 1 {
            let split = e as usize + 1;
            format!("{}.{}", &digits[..split], &digits[split..])
        } else {
            format!("{}{}", digits, "0".repeat(e as usize + 1 - DECIMAL_DIGITS))
        }
    } else {
        format!("{}.{}e{}", &digits[..1], &digits[1..], e)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}
