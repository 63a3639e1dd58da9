//! Exact optimum of the finite separation problem: assign non-negative values
//! to a point set so that every pair is at least `c(|a - b|)` apart, keeping
//! the largest value as small as possible.
//!
//! Fixing the ascending order of the assigned values turns the problem into a
//! longest path: the first point gets 0 and each later point gets the largest
//! `value(prev) + c(distance)` over the points before it. The optimum is the
//! minimum of that over all orders.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fib_core::fib;
use crate::generic_proxinv::{distance, ConstraintFunction};
use crate::proxinv_fib::{f_value, max_f_up_to_length};
use crate::rational::{reciprocal, ExactRational, Natural};

pub const DEFAULT_MAX_POINTS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteInstance {
    points: Vec<u64>,
    constraint: ConstraintFunction,
}

impl FiniteInstance {
    /// `points` must be non-empty and strictly increasing.
    pub fn new(points: Vec<u64>, constraint: ConstraintFunction) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::precondition("an instance needs at least one point"));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::precondition(format!(
                "instance points must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(FiniteInstance { points, constraint })
    }

    /// `{1, 2, …, size}`.
    pub fn interval(size: u64, constraint: ConstraintFunction) -> Result<Self> {
        Self::new((1..=size).collect(), constraint)
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn constraint(&self) -> &ConstraintFunction {
        &self.constraint
    }
}

pub type Assignment = BTreeMap<u64, ExactRational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimumResult {
    /// Smallest achievable maximum value.
    pub optimum: ExactRational,
    pub witness: Assignment,
    /// The value order realizing the witness; lexicographically smallest
    /// among optimal orders.
    pub order: Vec<u64>,
    pub orders_explored: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_points: usize,
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_points: DEFAULT_MAX_POINTS,
            workers: crate::pairs::default_workers(),
        }
    }
}

/// Minimal maximum for one fixed value order, with the assignment realizing
/// it. `order` lists the points from smallest to largest assigned value.
pub fn minimal_max_for_order(order: &[u64], inst: &FiniteInstance) -> Result<(ExactRational, Assignment)> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != inst.points {
        return Err(Error::precondition(format!(
            "order {order:?} is not a permutation of the instance points {:?}",
            inst.points
        )));
    }
    let mut values: Vec<ExactRational> = Vec::with_capacity(order.len());
    for (j, &p) in order.iter().enumerate() {
        let mut v = ExactRational::zero();
        for (i, &q) in order[..j].iter().enumerate() {
            let candidate = &values[i] + inst.constraint.evaluate(distance(p, q))?;
            if candidate > v {
                v = candidate;
            }
        }
        values.push(v);
    }
    let max = values.iter().max().cloned().unwrap_or_else(ExactRational::zero);
    Ok((max, order.iter().copied().zip(values).collect()))
}

/// Every pair of assigned points is separated by at least the constraint.
pub fn assignment_is_feasible(assignment: &Assignment, constraint: &ConstraintFunction) -> bool {
    let entries: Vec<_> = assignment.iter().collect();
    entries.iter().enumerate().all(|(i, (a, va))| {
        entries[i + 1..].iter().all(|(b, vb)| {
            let gap = if va > vb { *va - *vb } else { *vb - *va };
            gap >= constraint.evaluate(distance(**a, **b)).expect("points are distinct")
        })
    })
}

/// Integer weights `c(|p_i - p_j|) · D` over a common denominator `D`.
struct Weights {
    w: Vec<Vec<BigInt>>,
    scale: BigInt,
}

fn weights(inst: &FiniteInstance) -> Result<Weights> {
    let mut raw = Vec::with_capacity(inst.points.len());
    let mut scale = BigInt::one();
    for &p in &inst.points {
        let mut row = Vec::with_capacity(inst.points.len());
        for &q in &inst.points {
            let c = if p == q {
                ExactRational::zero()
            } else {
                inst.constraint.evaluate(distance(p, q))?
            };
            scale = scale.lcm(c.denom());
            row.push(c);
        }
        raw.push(row);
    }
    let w = raw
        .iter()
        .map(|row| row.iter().map(|c| c.numer() * (&scale / c.denom())).collect())
        .collect();
    Ok(Weights { w, scale })
}

struct Best {
    value: BigInt,
    order: Vec<usize>,
}

/// Depth-first walk over orders with `prefix` fixed, in lexicographic order.
/// `level[j]` holds the scaled value of `prefix[j]`.
fn walk(weights: &Weights, prefix: &mut Vec<usize>, level: &mut Vec<BigInt>, used: &mut [bool], best: &mut Option<Best>, explored: &mut u64) {
    let m = used.len();
    if prefix.len() == m {
        *explored += 1;
        let top = level.iter().max().expect("non-empty").clone();
        if best.as_ref().is_none_or(|b| top < b.value) {
            *best = Some(Best {
                value: top,
                order: prefix.clone(),
            });
        }
        return;
    }
    for next in 0..m {
        if used[next] {
            continue;
        }
        let mut v = BigInt::zero();
        for (i, &p) in prefix.iter().enumerate() {
            let candidate = &level[i] + &weights.w[p][next];
            if candidate > v {
                v = candidate;
            }
        }
        used[next] = true;
        prefix.push(next);
        level.push(v);
        walk(weights, prefix, level, used, best, explored);
        level.pop();
        prefix.pop();
        used[next] = false;
    }
}

fn search_block(weights: &Weights, first: usize, m: usize) -> (Option<Best>, u64) {
    let mut used = vec![false; m];
    used[first] = true;
    let mut prefix = vec![first];
    let mut level = vec![BigInt::zero()];
    let mut best = None;
    let mut explored = 0;
    walk(weights, &mut prefix, &mut level, &mut used, &mut best, &mut explored);
    (best, explored)
}

/// Exhaustive minimum over all `m!` value orders.
///
/// Blocks of orders sharing a first element run in parallel; each keeps its
/// first strictly-better order, and blocks are merged by value then by first
/// element, so ties resolve to the lexicographically smallest order whatever
/// the worker count. The winning assignment is re-checked in exact rationals
/// before it is returned.
pub fn exact_optimum(inst: &FiniteInstance, opts: &SearchOptions) -> Result<OptimumResult> {
    let m = inst.points.len();
    if m > opts.max_points {
        return Err(Error::ResourceBound {
            what: "instance size (points)",
            requested: m as u128,
            limit: opts.max_points as u128,
        });
    }
    let weights = weights(inst)?;
    let run = |first: usize| search_block(&weights, first, m);
    let blocks: Vec<(Option<Best>, u64)> = if opts.workers <= 1 || m <= 1 {
        (0..m).map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .expect("failed to start worker pool")
            .install(|| (0..m).into_par_iter().map(run).collect())
    };

    let explored = blocks.iter().map(|(_, n)| n).sum();
    let best = blocks
        .into_iter()
        .filter_map(|(b, _)| b)
        .reduce(|acc, b| match b.value.cmp(&acc.value) {
            Ordering::Less => b,
            _ => acc,
        })
        .expect("at least one order");

    let order: Vec<u64> = best.order.iter().map(|&i| inst.points[i]).collect();
    let (optimum, witness) = minimal_max_for_order(&order, inst)?;
    assert_eq!(
        optimum,
        ExactRational::new(best.value.clone(), weights.scale.clone()),
        "scaled and exact optima disagree"
    );
    assert!(
        assignment_is_feasible(&witness, &inst.constraint),
        "optimal assignment violates a constraint"
    );
    Ok(OptimumResult {
        optimum,
        witness,
        order,
        orders_explored: explored,
    })
}

/// `1 + Σ_{i=1}^{n-1} 1/F_{2i} + 1/F_{2n+1}` for `n >= 2`.
pub fn conjectured_bound(n: usize) -> Result<ExactRational> {
    if n < 2 {
        return Err(Error::precondition(format!("the conjectured bound needs n >= 2, got {n}")));
    }
    let run: ExactRational = (1..n).map(|i| reciprocal(&fib(2 * i))).sum();
    Ok(ExactRational::one() + run + reciprocal(&fib(2 * n + 1)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjectureReport {
    pub n: usize,
    /// `T = {1, …, F_{2n}}`
    pub points: Vec<u64>,
    pub optimum: OptimumResult,
    pub conjectured: ExactRational,
    /// Largest `f(a)` over `a ∈ T`, and where it is attained.
    pub f_max_on_points: (u64, ExactRational),
    /// Largest `f(a)` over integers of length `<= n`, and where it is attained.
    pub f_max_up_to_length: (Natural, ExactRational),
    /// `optimum` compared with `conjectured`.
    pub optimum_vs_conjectured: Ordering,
    /// `f_max_up_to_length` compared with `conjectured`.
    pub f_max_vs_conjectured: Ordering,
}

/// Solves `T = {1, …, F_{2n}}` under `c(n) = 1/n` exactly and sets the result
/// beside the conjectured bound and the values `f` reaches. Nothing is
/// asserted about which should be smaller.
pub fn compare_with_conjecture(n: usize, opts: &SearchOptions) -> Result<ConjectureReport> {
    let conjectured = conjectured_bound(n)?;
    let size = fib(2 * n);
    if size > Natural::from(opts.max_points) {
        return Err(Error::ResourceBound {
            what: "instance size F_{2n}",
            requested: u128::try_from(&size).unwrap_or(u128::MAX),
            limit: opts.max_points as u128,
        });
    }
    let size = u64::try_from(&size).expect("bounded by max_points");
    let inst = FiniteInstance::interval(size, ConstraintFunction::reciprocal())?;
    let optimum = exact_optimum(&inst, opts)?;
    let f_max_on_points = inst
        .points()
        .iter()
        .map(|&a| (a, f_value(&Natural::from(a))))
        .fold(None::<(u64, ExactRational)>, |acc, (a, v)| match acc {
            Some((_, ref best)) if *best >= v => acc,
            _ => Some((a, v)),
        })
        .expect("non-empty");
    let f_max_up_to_length = max_f_up_to_length(n)?;
    Ok(ConjectureReport {
        n,
        points: inst.points().to_vec(),
        optimum_vs_conjectured: optimum.optimum.cmp(&conjectured),
        f_max_vs_conjectured: f_max_up_to_length.1.cmp(&conjectured),
        optimum,
        conjectured,
        f_max_on_points,
        f_max_up_to_length,
    })
}
