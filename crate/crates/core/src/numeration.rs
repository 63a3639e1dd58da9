//! Positional numeration systems over a strictly increasing basis
//! `u_1 = 1 < u_2 < …`, and the even-Fibonacci system `u_i = F_{2i}`.
//!
//! # Digit order
//!
//! A [`DigitString`] stores the least-significant digit first: `x[1]` is the
//! coefficient of `u_1`. This is the word order `d_1 d_2 ⋯ d_n` used
//! throughout the crate, so a "prefix" of a representation is its low-order
//! end. Use [`DigitString::to_msd_string`] when a conventional big-endian
//! rendering is wanted.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fib_core::fib;
use crate::rational::Natural;

/// Finite digit sequence, least-significant digit first, 1-indexed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitString(Vec<u64>);

impl DigitString {
    /// Wraps `digits` as given; trailing zeros are kept.
    pub fn new(digits: Vec<u64>) -> Self {
        DigitString(digits)
    }

    /// The empty string ε, canonical representation of 0.
    pub fn empty() -> Self {
        DigitString(Vec::new())
    }

    /// Wraps `digits` and strips most-significant zeros.
    pub fn canonical(digits: Vec<u64>) -> Self {
        let mut x = DigitString(digits);
        x.canonicalize();
        x
    }

    pub fn canonicalize(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.0.last() != Some(&0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `x[position]`, 1-based; positions past the end read as 0.
    pub fn get(&self, position: usize) -> u64 {
        assert!(position >= 1, "digit positions are 1-based");
        self.0.get(position - 1).copied().unwrap_or(0)
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<u64> {
        self.0
    }

    /// Same digits, most-significant first, e.g. `[1,2,0,1,0]` for 100.
    pub fn to_msd_string(&self) -> String {
        let mut rev = self.0.clone();
        rev.reverse();
        format_digit_list(&rev)
    }

    /// Parses a most-significant-first listing into LSD-first storage.
    pub fn from_msd_str(text: &str) -> Result<Self> {
        let mut x: DigitString = text.parse()?;
        x.0.reverse();
        Ok(x)
    }
}

fn format_digit_list(digits: &[u64]) -> String {
    let inner: Vec<String> = digits.iter().map(u64::to_string).collect();
    format!("[{}]", inner.join(","))
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digit_list(&self.0))
    }
}

impl FromStr for DigitString {
    type Err = Error;

    /// Accepts `[2,1,1]`, `2,1,1`, the compact `211` (one digit per
    /// character), and `[]`, `ε` or the empty string for ε.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("`{s}` is not a digit string (try `[2,1,1]` or `211`)"));
        let body = s.trim();
        let body = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .unwrap_or(body)
            .trim();
        if body.is_empty() || body == "ε" {
            return Ok(DigitString::empty());
        }
        let digits = if body.contains(',') {
            body.split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        } else {
            body.chars()
                .map(|c| c.to_digit(10).map(u64::from).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(DigitString(digits))
    }
}

/// How the terms of a [`NumerationSystem`] are produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisRule {
    /// `u_i = F_{2i}`.
    FibEven,
    /// `u_i = 2^{i-1}`.
    PowersOfTwo,
    /// A finite list `u_1, …, u_k`; asking for `u_{k+1}` is an error.
    Explicit(Vec<Natural>),
    /// `u_i = Σ_j coefficients[j] · u_{i-1-j}` once the listed initial terms
    /// `u_1, …, u_t` run out.
    LinearRecurrence {
        coefficients: Vec<BigInt>,
        initial: Vec<Natural>,
    },
    /// The system `{u_0, u_1, …}` generated by a [`FraenkelRecurrence`],
    /// relabelled so that its `u_0 = 1` becomes the first term.
    Fraenkel(FraenkelRecurrence),
}

/// A strictly increasing basis `u_1 = 1 < u_2 < …`, materialized lazily.
///
/// Terms are computed on demand and cached behind a lock; every extension
/// re-checks strict monotonicity, so a bad user basis fails on first use of
/// the offending index and the cache only ever holds a valid prefix.
pub struct NumerationSystem {
    name: String,
    rule: BasisRule,
    terms: RwLock<Vec<Natural>>,
}

impl fmt::Debug for NumerationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumerationSystem")
            .field("name", &self.name)
            .field("rule", &self.rule)
            .finish()
    }
}

impl Clone for NumerationSystem {
    fn clone(&self) -> Self {
        let terms = self.terms.read().expect("basis cache poisoned").clone();
        NumerationSystem {
            name: self.name.clone(),
            rule: self.rule.clone(),
            terms: RwLock::new(terms),
        }
    }
}

impl NumerationSystem {
    fn with_rule(name: impl Into<String>, rule: BasisRule) -> Self {
        NumerationSystem {
            name: name.into(),
            rule,
            terms: RwLock::new(Vec::new()),
        }
    }

    /// The even-Fibonacci system `u_i = F_{2i}`: 1, 3, 8, 21, 55, …
    pub fn fib_even() -> Self {
        Self::with_rule("fib-even", BasisRule::FibEven)
    }

    /// Powers of two: 1, 2, 4, 8, …
    pub fn binary() -> Self {
        Self::with_rule("binary", BasisRule::PowersOfTwo)
    }

    pub fn explicit(name: impl Into<String>, basis: Vec<Natural>) -> Result<Self> {
        let name = name.into();
        check_prefix(&name, &basis)?;
        Ok(Self::with_rule(name, BasisRule::Explicit(basis)))
    }

    pub fn linear_recurrence(
        name: impl Into<String>,
        coefficients: Vec<BigInt>,
        initial: Vec<Natural>,
    ) -> Result<Self> {
        let name = name.into();
        if coefficients.is_empty() {
            return Err(Error::Config(format!("system `{name}`: recurrence needs at least one coefficient")));
        }
        if initial.len() < coefficients.len() {
            return Err(Error::Config(format!(
                "system `{name}`: a recurrence of order {} needs at least {} initial values, got {}",
                coefficients.len(),
                coefficients.len(),
                initial.len()
            )));
        }
        check_prefix(&name, &initial)?;
        Ok(Self::with_rule(name, BasisRule::LinearRecurrence { coefficients, initial }))
    }

    pub fn from_fraenkel(name: impl Into<String>, rec: FraenkelRecurrence) -> Self {
        Self::with_rule(name, BasisRule::Fraenkel(rec))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rule(&self) -> &BasisRule {
        &self.rule
    }

    fn compute(&self, i: usize, known: &[Natural]) -> Result<Natural> {
        let missing = |reason: &str| Error::Basis {
            system: self.name.clone(),
            index: i,
            reason: reason.to_string(),
        };
        Ok(match &self.rule {
            BasisRule::FibEven => fib(2 * i),
            BasisRule::PowersOfTwo => Natural::one() << (i - 1),
            BasisRule::Explicit(list) => list
                .get(i - 1)
                .cloned()
                .ok_or_else(|| missing(&format!("the explicit basis lists only {} terms", list.len())))?,
            BasisRule::LinearRecurrence { coefficients, initial } => {
                if let Some(v) = initial.get(i - 1) {
                    v.clone()
                } else {
                    let mut acc = BigInt::zero();
                    for (j, c) in coefficients.iter().enumerate() {
                        acc += c * BigInt::from(known[i - 2 - j].clone());
                    }
                    acc.to_biguint()
                        .ok_or_else(|| missing("the recurrence produced a negative term"))?
                }
            }
            BasisRule::Fraenkel(rec) => rec.term(i - 1),
        })
    }

    /// `u_i` (1-based).
    pub fn term(&self, i: usize) -> Result<Natural> {
        if i == 0 {
            return Err(Error::precondition("basis indices start at 1"));
        }
        self.ensure(i)?;
        Ok(self.terms.read().expect("basis cache poisoned")[i - 1].clone())
    }

    fn ensure(&self, count: usize) -> Result<()> {
        if self.terms.read().expect("basis cache poisoned").len() >= count {
            return Ok(());
        }
        let mut terms = self.terms.write().expect("basis cache poisoned");
        while terms.len() < count {
            let i = terms.len() + 1;
            let next = self.compute(i, &terms)?;
            let ok = match terms.last() {
                None => next.is_one(),
                Some(prev) => &next > prev,
            };
            if !ok {
                return Err(Error::Basis {
                    system: self.name.clone(),
                    index: i,
                    reason: if i == 1 {
                        format!("u_1 must be 1, got {next}")
                    } else {
                        format!("basis is not strictly increasing (u_{i} = {next} <= u_{})", i - 1)
                    },
                });
            }
            terms.push(next);
        }
        Ok(())
    }

    /// `u_1, …, u_count`.
    pub fn terms(&self, count: usize) -> Result<Vec<Natural>> {
        self.ensure(count)?;
        Ok(self.terms.read().expect("basis cache poisoned")[..count].to_vec())
    }

    /// `u_1, …, u_k` where `u_k` is the first term exceeding `bound`.
    pub fn terms_exceeding(&self, bound: &Natural) -> Result<Vec<Natural>> {
        loop {
            let next = {
                let terms = self.terms.read().expect("basis cache poisoned");
                if let Some(k) = terms.iter().position(|u| u > bound) {
                    return Ok(terms[..=k].to_vec());
                }
                terms.len() + 1
            };
            // one term at a time: a finite basis may end right after the answer
            self.ensure(next)?;
        }
    }
}

fn check_prefix(name: &str, terms: &[Natural]) -> Result<()> {
    match terms.first() {
        None => return Err(Error::Config(format!("system `{name}`: basis is empty"))),
        Some(u1) if !u1.is_one() => {
            return Err(Error::Config(format!("system `{name}`: u_1 must be 1, got {u1}")))
        }
        _ => {}
    }
    if let Some(i) = terms.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "system `{name}`: basis is not strictly increasing at u_{} = {} -> u_{} = {}",
            i + 1,
            terms[i],
            i + 2,
            terms[i + 1]
        )));
    }
    Ok(())
}

pub(crate) fn fib_even_system() -> &'static NumerationSystem {
    static SYSTEM: OnceLock<NumerationSystem> = OnceLock::new();
    SYSTEM.get_or_init(NumerationSystem::fib_even)
}

/// Greedy representation of `n` in `system`: at each basis element from the
/// largest one `<= n` downwards, take as many copies as fit.
pub fn encode(n: &Natural, system: &NumerationSystem) -> Result<DigitString> {
    let terms = system.terms_exceeding(n)?;
    // terms.last() > n, so it never receives a digit.
    let mut digits = vec![0u64; terms.len() - 1];
    let mut rest = n.clone();
    for (i, u) in terms[..terms.len() - 1].iter().enumerate().rev() {
        if rest.is_zero() {
            break;
        }
        let (q, r) = rest.div_rem(u);
        digits[i] = q.to_u64().ok_or_else(|| Error::Basis {
            system: system.name().to_string(),
            index: i + 1,
            reason: format!("digit {q} does not fit in 64 bits"),
        })?;
        rest = r;
    }
    Ok(DigitString::canonical(digits))
}

/// Representation of `n` in the even-Fibonacci system.
pub fn encode_fib(n: &Natural) -> DigitString {
    encode(n, fib_even_system()).expect("the even-Fibonacci basis is unbounded")
}

/// `Σ x[i] · u_i`. Any digit string is accepted, valid or not.
pub fn decode(x: &DigitString, system: &NumerationSystem) -> Result<Natural> {
    let len = x.len();
    if len == 0 {
        return Ok(Natural::zero());
    }
    let terms = system.terms(len)?;
    Ok(x.digits()
        .iter()
        .zip(&terms)
        .filter(|(d, _)| **d != 0)
        .map(|(d, u)| u * *d)
        .sum())
}

pub fn decode_fib(x: &DigitString) -> Natural {
    decode(x, fib_even_system()).expect("the even-Fibonacci basis is unbounded")
}

/// `Σ_{j<=i} x[j] u_j < u_{i+1}` for every `i`.
///
/// Only positions up to the last nonzero digit need checking: past it the
/// prefix sum is constant while the basis keeps growing.
pub fn is_valid_fraenkel(x: &DigitString, system: &NumerationSystem) -> Result<bool> {
    let len = x.digits().iter().rposition(|&d| d != 0).map_or(0, |p| p + 1);
    if len == 0 {
        return Ok(true);
    }
    let terms = system.terms(len + 1)?;
    let mut prefix = Natural::zero();
    for i in 0..len {
        prefix += &terms[i] * x.digits()[i];
        if prefix >= terms[i + 1] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Digits in `{0,1,2}` and no factor `2 1* 2`, decided in one scan.
pub fn is_valid_fib(x: &DigitString) -> bool {
    // true while the digits since the last 2 have all been 1s
    let mut open = false;
    for &d in x.digits() {
        match d {
            0 => open = false,
            1 => {}
            2 if open => return false,
            2 => open = true,
            _ => return false,
        }
    }
    true
}

/// Coefficients `b_1 >= b_2 >= … >= b_m >= 1` and initial values
/// `u_{-m+1}, …, u_{-1}` of a recurrence `u_0 = 1`,
/// `u_n = b_1 u_{n-1} + … + b_m u_{n-m}`.
#[derive(Debug, Clone)]
pub struct FraenkelRecurrence {
    coefficients: Vec<u64>,
    /// `initial[t]` is `u_{-m+1+t}`.
    initial: Vec<Natural>,
    terms: Arc<RwLock<Vec<Natural>>>,
}

impl PartialEq for FraenkelRecurrence {
    fn eq(&self, other: &Self) -> bool {
        self.coefficients == other.coefficients && self.initial == other.initial
    }
}

impl Eq for FraenkelRecurrence {}

impl FraenkelRecurrence {
    /// `initial_values` lists `u_{-m+1}, …, u_{-1}` and must have `m - 1`
    /// entries.
    pub fn new(coefficients: Vec<u64>, initial_values: Vec<Natural>) -> Result<Self> {
        let m = coefficients.len();
        if m == 0 {
            return Err(Error::precondition("a recurrence needs m >= 1 coefficients"));
        }
        if let Some(j) = coefficients.iter().position(|&b| b == 0) {
            return Err(Error::precondition(format!("coefficient b_{} must be >= 1", j + 1)));
        }
        if let Some(j) = coefficients.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::precondition(format!(
                "coefficients must be non-increasing, but b_{} = {} < b_{} = {}",
                j + 1,
                coefficients[j],
                j + 2,
                coefficients[j + 1]
            )));
        }
        if initial_values.len() != m - 1 {
            return Err(Error::precondition(format!(
                "expected {} initial values u_{{-{}}}..u_{{-1}}, got {}",
                m - 1,
                m - 1,
                initial_values.len()
            )));
        }
        Ok(FraenkelRecurrence {
            coefficients,
            initial: initial_values,
            terms: Arc::new(RwLock::new(vec![Natural::one()])),
        })
    }

    /// All of `u_{-m+1}, …, u_{-1}` set to 0.
    pub fn with_zero_initial(coefficients: Vec<u64>) -> Result<Self> {
        let m = coefficients.len();
        Self::new(coefficients, vec![Natural::zero(); m.saturating_sub(1)])
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `b_j`, 1-based.
    pub fn coefficient(&self, j: usize) -> u64 {
        self.coefficients[j - 1]
    }

    /// `u_n` for any `n >= -m + 1`; `u_0 = 1`.
    pub fn term_signed(&self, n: i64) -> Natural {
        let m = self.order() as i64;
        assert!(n > -m, "u_{n} is below the recurrence's initial window");
        if n < 0 {
            self.initial[(n + m - 1) as usize].clone()
        } else {
            self.term(n as usize)
        }
    }

    /// `u_n` for `n >= 0`.
    pub fn term(&self, n: usize) -> Natural {
        {
            let terms = self.terms.read().expect("recurrence cache poisoned");
            if let Some(v) = terms.get(n) {
                return v.clone();
            }
        }
        let mut terms = self.terms.write().expect("recurrence cache poisoned");
        while terms.len() <= n {
            let k = terms.len() as i64;
            let mut acc = Natural::zero();
            for (j, &b) in self.coefficients.iter().enumerate() {
                let idx = k - 1 - j as i64;
                let u = if idx >= 0 {
                    terms[idx as usize].clone()
                } else {
                    self.term_signed(idx)
                };
                acc += u * b;
            }
            terms.push(acc);
        }
        terms[n].clone()
    }
}

/// Checks the two-fold digit condition for recurrence-defined systems,
/// literally.
///
/// Here `x` is read with `x[j]` as the digit `d_{j-1}` of `u_{j-1}`, so
/// `x[1]` is the units digit `d_0`. With `m` the recurrence order:
///
/// 1. for `k >= m - 1` and `0 <= j <= m - 2`, if
///    `(d_k, …, d_{k-j+1}) = (b_1, …, b_j)` then `d_{k-j} <= b_{j+1}`;
///    if the match has length `m - 1`, then `d_{k-m+1} < b_m`;
/// 2. for `0 <= k < m - 1` the same rule holds for `j <= k - 1`, and a match
///    of length `k` requires `d_0 < Σ_{i=k+1}^{m} b_i u_{k+1-i}`.
pub fn check_two_fold_condition(x: &DigitString, rec: &FraenkelRecurrence) -> bool {
    let m = rec.order();
    let d = |idx: usize| x.digits().get(idx).copied().unwrap_or(0);
    let b = |j: usize| rec.coefficient(j);
    // Digits above the string are 0 and can never start a match (b_1 >= 1),
    // so k ranges over the string and the low window that (ii) covers.
    let top = x.len().max(m);
    for k in 0..top {
        // longest j with (d_k, …, d_{k-j+1}) = (b_1, …, b_j), capped by what
        // the applicable clause inspects
        let cap = if k + 1 >= m { m - 1 } else { k };
        let mut j = 0;
        loop {
            // the digit d_{k-j} is constrained by the match of length j
            let digit = d(k - j);
            if k + 1 >= m {
                // clause (i)
                if j == m - 1 {
                    if digit >= b(m) {
                        return false;
                    }
                    break;
                } else if digit > b(j + 1) {
                    return false;
                }
            } else if j == k {
                // clause (ii), boundary digit d_0
                let bound: Natural = (k + 1..=m)
                    .map(|i| rec.term_signed(k as i64 + 1 - i as i64) * b(i))
                    .sum();
                if Natural::from(digit) >= bound {
                    return false;
                }
                break;
            } else if digit > b(j + 1) {
                return false;
            }
            if j == cap || digit != b(j + 1) {
                break;
            }
            j += 1;
        }
    }
    true
}

/// The two-fold condition instantiated for the even-Fibonacci system.
///
/// The recurrence is `b = (2, 1, 1, …, 1)` of order `m = |x| + 1` with
/// `u_0 = 1` and `u_i = 0` below 0. Only the digit pattern and the boundary
/// values `u_{<=0}` enter the check (the terms themselves run `F_{2n+1}`, not
/// the basis). The extra `u_0` slot lies below `u_1`, so `x` is checked with a
/// leading zero digit in that slot.
pub fn fib_two_fold(x: &DigitString) -> bool {
    let m = x.len() + 1;
    let mut coefficients = vec![1u64; m];
    coefficients[0] = 2;
    let rec = FraenkelRecurrence::with_zero_initial(coefficients)
        .expect("(2, 1, …, 1) is non-increasing and positive");
    let mut shifted = Vec::with_capacity(m);
    shifted.push(0);
    shifted.extend_from_slice(x.digits());
    check_two_fold_condition(&DigitString::new(shifted), &rec)
}

/// Which validity rule [`enumerate_valid`] enumerates.
#[derive(Debug, Clone, Copy)]
pub enum ValidityRule<'a> {
    /// Digits in `{0,1,2}`, no factor `2 1* 2`; decoded in the even-Fibonacci system.
    Fib,
    /// Prefix sums `< u_{i+1}` in the given system.
    Fraenkel(&'a NumerationSystem),
}

/// Longest length [`enumerate_valid`] accepts unless told otherwise.
pub const DEFAULT_MAX_ENUMERATION_LENGTH: usize = 16;

/// All canonical valid strings of length `<= max_len` (ε included), sorted by
/// decoded value.
///
/// The strings are generated digit by digit from the rule itself, not via
/// [`encode`], so the result can serve as an independent check of it.
pub fn enumerate_valid(max_len: usize, rule: ValidityRule<'_>, bound: usize) -> Result<Vec<DigitString>> {
    if max_len > bound {
        return Err(Error::ResourceBound {
            what: "enumeration length",
            requested: max_len as u128,
            limit: bound as u128,
        });
    }
    let mut found: Vec<(Natural, DigitString)> = Vec::new();
    match rule {
        ValidityRule::Fib => {
            let terms = fib_even_system().terms(max_len.max(1))?;
            let mut digits = Vec::with_capacity(max_len);
            fib_walk(&mut digits, false, Natural::zero(), max_len, &terms, &mut found);
        }
        ValidityRule::Fraenkel(system) => {
            let terms = system.terms(max_len + 1)?;
            let mut digits = Vec::with_capacity(max_len);
            fraenkel_walk(&mut digits, Natural::zero(), max_len, &terms, &mut found)?;
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, x)| x).collect())
}

fn fib_walk(
    digits: &mut Vec<u64>,
    open: bool,
    value: Natural,
    max_len: usize,
    terms: &[Natural],
    out: &mut Vec<(Natural, DigitString)>,
) {
    if digits.last() != Some(&0) {
        out.push((value.clone(), DigitString::new(digits.clone())));
    }
    if digits.len() == max_len {
        return;
    }
    let u = &terms[digits.len()];
    for d in 0..=2u64 {
        if d == 2 && open {
            continue;
        }
        let next_open = match d {
            0 => false,
            1 => open,
            _ => true,
        };
        digits.push(d);
        fib_walk(digits, next_open, &value + u * d, max_len, terms, out);
        digits.pop();
    }
}

fn fraenkel_walk(
    digits: &mut Vec<u64>,
    value: Natural,
    max_len: usize,
    terms: &[Natural],
    out: &mut Vec<(Natural, DigitString)>,
) -> Result<()> {
    if digits.last() != Some(&0) {
        out.push((value.clone(), DigitString::new(digits.clone())));
    }
    if digits.len() == max_len {
        return Ok(());
    }
    let i = digits.len();
    // largest d with value + d·u_{i+1} < u_{i+2}
    let headroom = &terms[i + 1] - &value - 1u32;
    let top = (headroom / &terms[i]).to_u64().ok_or_else(|| Error::Basis {
        system: "enumeration".to_string(),
        index: i + 1,
        reason: "digit range does not fit in 64 bits".to_string(),
    })?;
    for d in 0..=top {
        digits.push(d);
        fraenkel_walk(digits, &value + &terms[i] * d, max_len, terms, out)?;
        digits.pop();
    }
    Ok(())
}

/// `L(n)`: number of digits in the canonical even-Fibonacci representation.
pub fn length_of(n: &Natural) -> usize {
    encode_fib(n).len()
}
