//! `f_S` for an arbitrary numeration system `S`, constraint functions, and an
//! exhaustive checker for whether `f_S` separates every pair as `c` demands.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::numeration::{encode, NumerationSystem};
use crate::pairs::{check_pairs, VerifyOptions, Violation, ViolationReport};
use crate::rational::{reciprocal, to_fraction_string, ExactRational, Natural};

/// Distances live in the metric `d(a, b) = |a - b|` on the naturals, so a
/// constraint only ever needs evaluating at positive integers.
pub type Distance = u64;

pub fn distance(a: u64, b: u64) -> Distance {
    a.abs_diff(b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `c(n) = scale / n`.
    Reciprocal { scale: ExactRational },
    /// `c(n) = value`.
    Constant(ExactRational),
    /// `c(n) = values[n - 1]` for `n <= values.len()`, `tail` beyond.
    Table {
        values: Vec<ExactRational>,
        tail: ExactRational,
    },
}

/// A non-increasing map from positive distances to required value gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintFunction {
    kind: ConstraintKind,
    description: String,
}

impl ConstraintFunction {
    /// `c(n) = 1/n`.
    pub fn reciprocal() -> Self {
        ConstraintFunction {
            kind: ConstraintKind::Reciprocal {
                scale: ExactRational::one(),
            },
            description: "c(n) = 1/n".to_string(),
        }
    }

    /// `c(n) = scale/n`.
    pub fn scaled_reciprocal(scale: ExactRational) -> Result<Self> {
        if scale.is_negative() {
            return Err(Error::Config(format!(
                "reciprocal scale must be >= 0, got {}",
                to_fraction_string(&scale)
            )));
        }
        let description = format!("c(n) = {}/n", to_fraction_string(&scale));
        Ok(ConstraintFunction {
            kind: ConstraintKind::Reciprocal { scale },
            description,
        })
    }

    pub fn constant(value: ExactRational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Config(format!(
                "constant constraint must be >= 0, got {}",
                to_fraction_string(&value)
            )));
        }
        let description = format!("c(n) = {}", to_fraction_string(&value));
        Ok(ConstraintFunction {
            kind: ConstraintKind::Constant(value),
            description,
        })
    }

    /// Explicit values for `n = 1, 2, …` followed by a constant tail. The
    /// whole table is checked to be non-negative and non-increasing.
    pub fn table(values: Vec<ExactRational>, tail: ExactRational) -> Result<Self> {
        if let Some(v) = values.iter().chain(std::iter::once(&tail)).find(|v| v.is_negative()) {
            return Err(Error::Config(format!(
                "constraint values must be >= 0, got {}",
                to_fraction_string(v)
            )));
        }
        let mut seq = values.iter().chain(std::iter::once(&tail)).enumerate().peekable();
        while let Some((i, v)) = seq.next() {
            if let Some((_, next)) = seq.peek() {
                if *next > v {
                    return Err(Error::Config(format!(
                        "constraint table must be non-increasing, but c({}) = {} < c({}) = {}",
                        i + 1,
                        to_fraction_string(v),
                        i + 2,
                        to_fraction_string(next)
                    )));
                }
            }
        }
        let description = format!(
            "c(n) = table[{}] then {}",
            values.iter().map(to_fraction_string).collect::<Vec<_>>().join(", "),
            to_fraction_string(&tail)
        );
        Ok(ConstraintFunction {
            kind: ConstraintKind::Table { values, tail },
            description,
        })
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `c(distance)`; the distance must be positive.
    pub fn evaluate(&self, distance: Distance) -> Result<ExactRational> {
        if distance == 0 {
            return Err(Error::precondition("constraints are only defined for distances >= 1"));
        }
        Ok(match &self.kind {
            ConstraintKind::Reciprocal { scale } => scale * reciprocal(&Natural::from(distance)),
            ConstraintKind::Constant(v) => v.clone(),
            ConstraintKind::Table { values, tail } => values
                .get(distance as usize - 1)
                .unwrap_or(tail)
                .clone(),
        })
    }

    /// `c(1), …, c(max_distance)`.
    pub fn table_up_to(&self, max_distance: Distance) -> Vec<ExactRational> {
        (1..=max_distance)
            .map(|n| self.evaluate(n).expect("distance is positive"))
            .collect()
    }

    /// True when `self(n) <= other(n)` for every `1 <= n <= max_distance`.
    pub fn pointwise_le(&self, other: &ConstraintFunction, max_distance: Distance) -> bool {
        self.table_up_to(max_distance)
            .iter()
            .zip(other.table_up_to(max_distance))
            .all(|(a, b)| *a <= b)
    }
}

/// `Σ d_i / u_i` over the greedy representation of `a` in `system`.
pub fn f_generic(a: &Natural, system: &NumerationSystem) -> Result<ExactRational> {
    let x = encode(a, system)?;
    let terms = system.terms(x.len())?;
    Ok(x.digits()
        .iter()
        .zip(&terms)
        .filter(|(d, _)| **d != 0)
        .map(|(d, u)| ExactRational::new(BigInt::from(*d), BigInt::from(u.clone())))
        .sum())
}

/// `f_S(0), …, f_S(max)`.
pub fn f_generic_values(system: &NumerationSystem, max: u64) -> Result<Vec<ExactRational>> {
    (0..=max).map(|a| f_generic(&Natural::from(a), system)).collect()
}

/// Checks `|f_S(a) - f_S(b)| >= c(|a - b|)` for every `0 <= a < b <= max`.
pub fn check_system(
    system: &NumerationSystem,
    constraint: &ConstraintFunction,
    max: u64,
    opts: &VerifyOptions,
) -> Result<ViolationReport> {
    check_system_streaming(system, constraint, max, opts, |_| {})
}

/// [`check_system`], handing each violation to `sink` in `(a, b)` order as
/// soon as its block of the range is done.
pub fn check_system_streaming(
    system: &NumerationSystem,
    constraint: &ConstraintFunction,
    max: u64,
    opts: &VerifyOptions,
    sink: impl FnMut(&Violation),
) -> Result<ViolationReport> {
    opts.check_pair_budget(max)?;
    let values = f_generic_values(system, max)?;
    check_pairs(&values, constraint, opts, sink)
}

/// Pairs `a < b <= max` with `f_S(a) = f_S(b)`, sorted.
pub fn f_collisions(system: &NumerationSystem, max: u64) -> Result<Vec<(u64, u64)>> {
    let values = f_generic_values(system, max)?;
    let mut order: Vec<u64> = (0..=max).collect();
    order.sort_by(|&a, &b| values[a as usize].cmp(&values[b as usize]).then(a.cmp(&b)));
    let mut out = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end] as usize] == values[order[start] as usize] {
            end += 1;
        }
        let mut group = order[start..end].to_vec();
        group.sort_unstable();
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                out.push((a, b));
            }
        }
        start = end;
    }
    out.sort_unstable();
    Ok(out)
}
