//! Numerical engine for scalar impulsive delay differential equations
//!
//! ```text
//! x'(t) + sum_k A_k(t) x[h_k(t)] = f(t),    x(tau_j) = B_j x(tau_j - 0).
//! ```
//!
//! The crate simulates solutions by the method of steps, computes fundamental
//! functions `X(t, s)`, removes impulses by an equivalent impulse-free equation,
//! and certifies oscillation or non-oscillation through explicit window-integral
//! tests and a monotone fixed-point solver for the characteristic inequality.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod empirics;
pub mod impulse_algebra;
pub mod integrator;
pub mod model;
pub mod transform;
pub mod verify;
