//! Hybrid aleatory/epistemic uncertainty propagation through dynamical
//! systems with the decoupled multi-probability density evolution method.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numerical
//! piece of the pipeline:
//!
//! * [`uncertainty`]: random variables, probability boxes, intervals and the
//!   pseudo-densities that turn epistemic parameters into sampling coordinates.
//! * [`points`]: representative point sets with Voronoi-cell probabilities and
//!   cumulative-probability rearrangement.
//! * [`dynamics`]: the deterministic simulators (linear oscillator, pinched
//!   and degrading Bouc-Wen shear frame, spectral excitation, black-box models).
//! * [`pdem`]: per-point one-dimensional density solutions, their product
//!   assembly into joint densities, and conditional-density extraction.
//! * [`propagation`]: the end-to-end engines producing output p-boxes, plus
//!   double-loop and vertex Monte Carlo references.
//! * [`analytic`]: closed-form bounds for the white-noise oscillator.
//!
//! IO, configuration and parallel execution live in the companion `std` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod pdem;
pub mod points;
pub mod propagation;
pub mod quad;
pub mod rng;
pub mod special;
pub mod uncertainty;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
