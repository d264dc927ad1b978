//! Numerical machinery for nonlocal boundary-value problems of differential
//! inclusions
//!
//! ```text
//! x'(t) ∈ F(t, x(t)),  t ∈ [0, T],     x(0) = g(x)   (or x(T) = g(x))
//! ```
//!
//! built around guiding potentials. The crate is organised bottom-up:
//!
//! * [`convexset`] – compact convex values of `F` and their support calculus.
//! * [`multimap`] – Carathéodory right-hand sides, growth profiles, extremal
//!   and filtered selections, and the potential-field homotopy.
//! * [`potential`] – potentials `V`, the truncated gradient field `W_V` and
//!   sampled verification of guiding, monotonicity and coercivity.
//! * [`bounds`] – closed-form Gronwall, escape, a-priori and invariant-ball
//!   radii.
//! * [`degree`] – Brouwer degree on boxes and balls (`N <= 4`).
//! * [`ivp`] – selection-based Euler integration and solution-set sampling.
//! * [`nonlocal`] – boundary functionals `g` and their hypothesis checks.
//! * [`solver`] – fixed-point, shooting and continuation solvers plus
//!   certification of the returned trajectories.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod convexset;
pub mod degree;
mod error;
pub mod ivp;
pub mod linalg;
pub mod multimap;
pub mod nonlocal;
pub mod potential;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};

/// State vectors in `R^N`.
pub type Vector = nalgebra::DVector<f64>;
/// Dense `N x N` matrices.
pub type Matrix = nalgebra::DMatrix<f64>;
