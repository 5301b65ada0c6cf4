//! Solver and verification harness for the spatially homogeneous Boltzmann
//! equation for Bose-Einstein particles with hard-sphere and asymptotically
//! hard-sphere collision kernels.
//!
//! The crate is organized around the pipeline of a run:
//!
//! * [`kernel`] evaluates the collision kernel B(v−v*, σ), post-collision
//!   velocities and the angular weight κ(θ);
//! * [`grid`] holds distributions on a truncated velocity lattice with an
//!   S² quadrature and computes moments and thermodynamic diagnostics;
//! * [`collide`] evaluates the gain/loss operators Q⁺, Q±, Q_K±, L_K and
//!   the doubly-truncated Q_{n,K}± on grid states;
//! * [`march`] advances states in time by Picard fixed-point iteration on
//!   contraction intervals or by a positivity-preserving exponential
//!   integrator for the intermediate (K-truncated) equation;
//! * [`bounds`] evaluates every explicit constant of the global-existence
//!   theorem (condition, L∞ ceiling, temperature floor, K*);
//! * [`verify`] hosts randomized property suites and brute-force oracles
//!   for the standalone inequalities the solver relies on.

// Validation deliberately writes `!(x > 0.0)` so NaN fails the check;
// rewriting as `x <= 0.0` would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod collide;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod march;
pub mod math;
pub mod verify;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
