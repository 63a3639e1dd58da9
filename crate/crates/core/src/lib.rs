//! Fibonacci numeration systems and the proximity inversion function built on
//! top of them.
//!
//! Every integer `a` has a unique representation `a = Σ d_i F_{2i}` with digits
//! in `{0, 1, 2}` and no factor `2 1* 2`. Applying those digits to the
//! reciprocals of the basis gives `f(a) = Σ d_i / F_{2i}`, a function that keeps
//! `|f(a) - f(b)| >= 1 / |a - b|` for all distinct `a`, `b`. This crate encodes
//! and decodes such representations, evaluates `f` exactly, and checks the
//! surrounding identities, orderings, bounds and finite-instance optima
//! exhaustively in exact rational arithmetic.
//!
//! Digit strings are stored least-significant digit first: position 1 holds
//! the coefficient of `u_1 = 1`. "Prefix" therefore always means the low-order
//! end of a representation.

pub mod cli;
pub mod error;
pub mod fib_core;
pub mod generic_proxinv;
pub mod numeration;
pub mod optimum_search;
pub mod pairs;
pub mod proxinv_fib;
pub mod rational;

pub use error::{Error, Result};
pub use rational::{ExactRational, Natural};
