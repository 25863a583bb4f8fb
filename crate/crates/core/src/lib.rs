//! Simulation and analysis of polarization squeezing generated by the Kerr
//! effect in a single pass through a polarization-maintaining fiber.
//!
//! * [`gaussian`]: covariance-matrix states, symplectic maps and loss.
//! * [`stokes`]: Stokes means and linearized Stokes noise of two-mode states.
//! * [`fock`]: exact truncated-Fock reference for the Stokes operators.
//! * [`experiment`]: forward model of the fiber/waveplate/PBS bench.
//! * [`analysis`]: dB arithmetic, noise-floor and loss corrections.
//! * [`cli`]: the `kerrpol` command-line front end.

// NaN must fail the range checks, so negated comparisons are intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod gaussian;
pub mod stokes;

pub use error::{Error, Result};
