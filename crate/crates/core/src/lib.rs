//! Numerical laboratory for modulated and prime-indexed ergodic averages.
//!
//! The crate is split by role:
//!
//! * [`prime_kernel`]: sieve-backed prime table, `Λ` / `Λ'`, logarithmic
//!   integral, exact Fourier–Bohr limits along (polynomials of) primes.
//! * [`mod_sequences`]: modulating sequences, their summability statistics
//!   and the counterexample constructions.
//! * [`operator_zoo`]: finite-dimensional operators and atomic measures on
//!   the circle, spectral decompositions, `L^p` norms of trigonometric
//!   polynomials.
//! * [`average_engines`]: streaming Cesàro / modulated / prime averages with
//!   limit prediction and convergence detection.
//! * [`theorem_suite`]: every claim as a quantified check producing a
//!   [`theorem_suite::CheckReport`].
//! * [`cli_runner`]: experiment specs, traces, and the `modavg` command line.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod average_engines;
pub mod cli_runner;
pub mod csvfmt;
pub mod error;
pub mod grid;
pub mod mod_sequences;
pub mod operator_zoo;
pub mod prime_kernel;
pub mod sum;
pub mod theorem_suite;

pub use angle::Angle;
pub use error::{Error, Result};
