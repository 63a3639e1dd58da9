//! Fibonacci numbers, the even-indexed basis `u_i = F_{2i}`, and exact
//! evaluators for the Fibonacci identities and inequalities that the
//! proximity-inversion construction rests on.

use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{natural_to_rational, reciprocal, ExactRational, Natural};

fn cache() -> &'static RwLock<Vec<Natural>> {
    static CACHE: OnceLock<RwLock<Vec<Natural>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(vec![Natural::zero(), Natural::one()]))
}

/// `F_n` with `F_0 = 0`, `F_1 = 1`. Memoized for the lifetime of the process.
pub fn fib(n: usize) -> Natural {
    {
        let table = cache().read().expect("fibonacci cache poisoned");
        if let Some(v) = table.get(n) {
            return v.clone();
        }
    }
    let mut table = cache().write().expect("fibonacci cache poisoned");
    while table.len() <= n {
        let next = &table[table.len() - 1] + &table[table.len() - 2];
        table.push(next);
    }
    table[n].clone()
}

/// `u_i = F_{2i}`, the 1-indexed basis of the even-Fibonacci system.
pub fn basis(i: usize) -> Result<Natural> {
    if i == 0 {
        return Err(Error::precondition("basis index must be >= 1 (u_1 = F_2 = 1)"));
    }
    Ok(fib(2 * i))
}

/// Exact test of `q < φ = (1 + √5) / 2`.
///
/// For `q >= 1/2` this is `(2q - 1)^2 < 5`; below `1/2` it always holds.
pub fn below_golden_ratio(q: &ExactRational) -> bool {
    let half = ExactRational::new(BigInt::one(), BigInt::from(2));
    if q < &half {
        return true;
    }
    let t = q * BigInt::from(2) - ExactRational::one();
    &t * &t < ExactRational::from_integer(BigInt::from(5))
}

fn fib_int(n: usize) -> BigInt {
    BigInt::from_biguint(Sign::Plus, fib(n))
}

fn fib_q(n: usize) -> ExactRational {
    natural_to_rational(&fib(n))
}

fn inv_fib(n: usize) -> ExactRational {
    reciprocal(&fib(n))
}

fn u_q(i: usize) -> ExactRational {
    fib_q(2 * i)
}

fn inv_u(i: usize) -> ExactRational {
    inv_fib(2 * i)
}

/// `Σ 1/F_j` over `indices`, accumulated over the lcm of the denominators
/// and reduced once; adding the rationals one by one spends its time in gcds.
fn sum_inv_fib(indices: impl IntoIterator<Item = usize>) -> ExactRational {
    let dens: Vec<BigInt> = indices.into_iter().map(fib_int).collect();
    if dens.is_empty() {
        return ExactRational::zero();
    }
    let common = dens.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
    let numer: BigInt = dens.iter().map(|d| &common / d).sum();
    ExactRational::new(numer, common)
}

/// The identities and inequalities the evaluator knows about.
///
/// Parameter order is `(n, r)` for [`IdentityKind::Catalan`], `(k, r)` for
/// [`IdentityKind::CatFrac`] and `(k, n)` for everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityKind {
    /// `F_n^2 - F_{n+r} F_{n-r} = (-1)^{n+r} F_r^2`, `0 <= r <= n`.
    Catalan,
    /// `F_{k+r} / (F_k^2 - 1) <= 1 / F_{k-r}` iff `k + r` is even, with
    /// equality exactly for `r ∈ {1, 2}`; `0 <= r < k`.
    CatFrac,
    /// `Σ_{i=k}^{n} F_{2i} = F_{2n+1} - F_{2k-1}`, `0 < k <= n`.
    SumEven,
    /// `u_k + u_n - Σ_{i=k+1}^{n-1} u_i - u_{k+1} - u_{n-1} = 0`, `n > k + 1`.
    SumCor1,
    /// `2 u_{k+1} + Σ_{i=k+2}^{n} u_i - u_k = F_{2n+1}`, `n > k + 1`.
    SumCor2,
    /// `u_n - u_{n-1} - Σ_{i=k}^{n-1} u_i = F_{2k+1}`, `n > k`.
    SumCor3,
    /// `Σ_{i=k}^{n} 1/F_{2i} < 1/F_{2k-2} + 1/F_{2n+2} - 1/F_{2k} - 1/F_{2n}`, `1 < k <= n`.
    RecipSum,
    /// `Σ_{i=k+1}^{n-1} 1/u_i + 1/u_{k+1} + 1/u_{n-1} <= 1/u_n + 1/u_k`, `n > k + 1`.
    RecipCor1,
    /// `Σ_{i=k+1}^{n} 1/u_i + 1/u_{k+1} + 1/F_{2n+1} < 1/u_k`, `n > k + 1`.
    RecipCor2,
    /// `1/F_{2n} + 1/F_{2k-1} <= Σ_{i=k}^{n-2} 1/F_{2i} + 2/F_{2n-2}`, `n > k`.
    RecipSum2,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 10] = [
        IdentityKind::Catalan,
        IdentityKind::CatFrac,
        IdentityKind::SumEven,
        IdentityKind::SumCor1,
        IdentityKind::SumCor2,
        IdentityKind::SumCor3,
        IdentityKind::RecipSum,
        IdentityKind::RecipCor1,
        IdentityKind::RecipCor2,
        IdentityKind::RecipSum2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Catalan => "CATALAN",
            IdentityKind::CatFrac => "CATFRAC",
            IdentityKind::SumEven => "SUM_EVEN",
            IdentityKind::SumCor1 => "SUM_COR1",
            IdentityKind::SumCor2 => "SUM_COR2",
            IdentityKind::SumCor3 => "SUM_COR3",
            IdentityKind::RecipSum => "RECIP_SUM",
            IdentityKind::RecipCor1 => "RECIP_COR1",
            IdentityKind::RecipCor2 => "RECIP_COR2",
            IdentityKind::RecipSum2 => "RECIP_SUM2",
        }
    }

    pub fn relation(self) -> Relation {
        match self {
            IdentityKind::Catalan
            | IdentityKind::SumEven
            | IdentityKind::SumCor1
            | IdentityKind::SumCor2
            | IdentityKind::SumCor3 => Relation::Equal,
            IdentityKind::CatFrac => Relation::ParityIff,
            IdentityKind::RecipSum | IdentityKind::RecipCor2 => Relation::Less,
            IdentityKind::RecipCor1 | IdentityKind::RecipSum2 => Relation::LessOrEqual,
        }
    }

    /// Every parameter tuple in the statement's domain whose largest index is
    /// at most `max`, in lexicographic order of the first parameter.
    pub fn parameter_domain(self, max: u64) -> Vec<[u64; 2]> {
        let mut out = Vec::new();
        match self {
            IdentityKind::Catalan => {
                for n in 0..=max {
                    for r in 0..=n {
                        out.push([n, r]);
                    }
                }
            }
            IdentityKind::CatFrac => {
                for k in 3..=max {
                    for r in 0..k {
                        out.push([k, r]);
                    }
                }
            }
            _ => {
                for k in 1..=max {
                    for n in k..=max {
                        if self.check_range(k, n).is_ok() {
                            out.push([k, n]);
                        }
                    }
                }
            }
        }
        out
    }

    fn check_range(self, a: u64, b: u64) -> Result<()> {
        let fail = |bound: &str| {
            Err(Error::precondition(format!(
                "{} requires {bound}; got ({a}, {b})",
                self.name()
            )))
        };
        let (k, n) = (a, b);
        match self {
            IdentityKind::Catalan => {
                if b > a {
                    return fail("0 <= r <= n");
                }
            }
            IdentityKind::CatFrac => {
                if b >= a {
                    return fail("0 <= r < k");
                }
                if a < 3 {
                    // F_1^2 - 1 = F_2^2 - 1 = 0
                    return fail("k >= 3 so that F_k^2 - 1 > 0");
                }
            }
            IdentityKind::SumEven => {
                if !(0 < k && k <= n) {
                    return fail("0 < k <= n");
                }
            }
            IdentityKind::SumCor1
            | IdentityKind::SumCor2
            | IdentityKind::RecipCor1
            | IdentityKind::RecipCor2 => {
                if k == 0 {
                    return fail("k >= 1");
                }
                if n <= k + 1 {
                    return fail("n > k + 1");
                }
            }
            IdentityKind::SumCor3 | IdentityKind::RecipSum2 => {
                if k == 0 {
                    return fail("k >= 1");
                }
                if n <= k {
                    return fail("n > k");
                }
            }
            IdentityKind::RecipSum => {
                if !(1 < k && k <= n) {
                    return fail("1 < k <= n");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
        IdentityKind::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| Error::Config(format!("unknown identity kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    Less,
    LessOrEqual,
    /// `lhs <= rhs` exactly when a parity condition holds, plus a stated
    /// equality case.
    ParityIff,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityVerdict {
    pub kind: IdentityKind,
    pub parameters: Vec<u64>,
    pub lhs: ExactRational,
    pub rhs: ExactRational,
    pub relation_claimed: Relation,
    pub holds: bool,
}

/// Evaluates both sides of `kind` at `params` and decides the claimed relation
/// exactly.
///
/// Each side is built from [`fib`] on its own; no partial sum is shared
/// between the two sides.
pub fn evaluate_identity(kind: IdentityKind, params: &[u64]) -> Result<IdentityVerdict> {
    let [a, b] = params else {
        return Err(Error::precondition(format!(
            "{kind} takes exactly two parameters, got {}",
            params.len()
        )));
    };
    let (a, b) = (*a, *b);
    kind.check_range(a, b)?;
    let (a, b) = (a as usize, b as usize);

    let (lhs, rhs) = match kind {
        IdentityKind::Catalan => {
            let (n, r) = (a, b);
            let lhs = fib_int(n) * fib_int(n) - fib_int(n + r) * fib_int(n - r);
            let square = fib_int(r) * fib_int(r);
            let rhs = if (n + r) % 2 == 0 { square } else { -square };
            (ExactRational::from_integer(lhs), ExactRational::from_integer(rhs))
        }
        IdentityKind::CatFrac => {
            let (k, r) = (a, b);
            let denom = fib_int(k) * fib_int(k) - BigInt::one();
            let lhs = ExactRational::new(fib_int(k + r), denom);
            (lhs, inv_fib(k - r))
        }
        IdentityKind::SumEven => {
            let (k, n) = (a, b);
            let lhs: ExactRational = (k..=n).map(|i| fib_q(2 * i)).sum();
            (lhs, fib_q(2 * n + 1) - fib_q(2 * k - 1))
        }
        IdentityKind::SumCor1 => {
            let (k, n) = (a, b);
            let middle: ExactRational = (k + 1..n).map(u_q).sum();
            let lhs = u_q(k) + u_q(n) - middle - u_q(k + 1) - u_q(n - 1);
            (lhs, ExactRational::zero())
        }
        IdentityKind::SumCor2 => {
            let (k, n) = (a, b);
            let tail: ExactRational = (k + 2..=n).map(u_q).sum();
            let lhs = u_q(k + 1) * BigInt::from(2) + tail - u_q(k);
            (lhs, fib_q(2 * n + 1))
        }
        IdentityKind::SumCor3 => {
            let (k, n) = (a, b);
            let run: ExactRational = (k..n).map(u_q).sum();
            (u_q(n) - u_q(n - 1) - run, fib_q(2 * k + 1))
        }
        IdentityKind::RecipSum => {
            let (k, n) = (a, b);
            let lhs = sum_inv_fib((k..=n).map(|i| 2 * i));
            let rhs = inv_fib(2 * k - 2) + inv_fib(2 * n + 2) - inv_fib(2 * k) - inv_fib(2 * n);
            (lhs, rhs)
        }
        IdentityKind::RecipCor1 => {
            let (k, n) = (a, b);
            let middle = sum_inv_fib((k + 1..n).map(|i| 2 * i));
            let lhs = middle + inv_u(k + 1) + inv_u(n - 1);
            (lhs, inv_u(n) + inv_u(k))
        }
        IdentityKind::RecipCor2 => {
            let (k, n) = (a, b);
            let run = sum_inv_fib((k + 1..=n).map(|i| 2 * i));
            let lhs = run + inv_u(k + 1) + inv_fib(2 * n + 1);
            (lhs, inv_u(k))
        }
        IdentityKind::RecipSum2 => {
            let (k, n) = (a, b);
            let lhs = inv_fib(2 * n) + inv_fib(2 * k - 1);
            let run = sum_inv_fib((k..n.saturating_sub(1)).map(|i| 2 * i));
            let rhs = run + ExactRational::new(BigInt::from(2), fib_int(2 * n - 2));
            (lhs, rhs)
        }
    };

    let relation = kind.relation();
    let holds = match relation {
        Relation::Equal => lhs == rhs,
        Relation::Less => lhs < rhs,
        Relation::LessOrEqual => lhs <= rhs,
        Relation::ParityIff => {
            let (k, r) = (a, b);
            let even = (k + r) % 2 == 0;
            let equality_case = even && (r == 1 || r == 2);
            (lhs <= rhs) == even && (lhs == rhs) == equality_case
        }
    };
    Ok(IdentityVerdict {
        kind,
        parameters: params.to_vec(),
        lhs,
        rhs,
        relation_claimed: relation,
        holds,
    })
}

/// Outcome of running one identity over its whole parameter domain.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub kind: IdentityKind,
    pub max_index: u64,
    pub checked: usize,
    pub failures: Vec<IdentityVerdict>,
    /// Parameter tuples where the two sides came out exactly equal.
    pub equalities: Vec<Vec<u64>>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluates `kind` at every tuple of [`IdentityKind::parameter_domain`], in
/// parallel; failures and equalities keep domain order.
pub fn run_identity(kind: IdentityKind, max_index: u64) -> SuiteOutcome {
    let mut outcome = SuiteOutcome {
        kind,
        max_index,
        checked: 0,
        failures: Vec::new(),
        equalities: Vec::new(),
    };
    let verdicts: Vec<IdentityVerdict> = kind
        .parameter_domain(max_index)
        .par_iter()
        .map(|params| evaluate_identity(kind, params).expect("domain tuples satisfy preconditions"))
        .collect();
    for verdict in verdicts {
        outcome.checked += 1;
        if verdict.lhs == verdict.rhs {
            outcome.equalities.push(verdict.parameters.clone());
        }
        if !verdict.holds {
            outcome.failures.push(verdict);
        }
    }
    outcome
}

/// `F_n` for signed `n`, via `F_{-n} = (-1)^{n+1} F_n`. Only used by tests.
#[cfg(test)]
pub(crate) fn fib_signed(n: i64) -> BigInt {
    let m = n.unsigned_abs() as usize;
    let v = fib_int(m);
    if n < 0 && m.is_multiple_of(2) {
        -v
    } else {
        v
    }
}
