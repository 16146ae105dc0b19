//! Pseudospectral implicit-Euler solver for the incompressible Navier–Stokes
//! equations on the periodic box `(0, 2π)³`, together with the scalar
//! machinery needed to check energy-stability bounds step by step.
//!
//! * [`grid`], [`field`], [`spectral`]: Fourier-Galerkin representation,
//!   norms, Leray projection and the dealiased advection term.
//! * [`stepper`]: semi-implicit and fully implicit Euler steps.
//! * [`analysis`]: a-priori bounds, the one-step cubic, timestep
//!   restrictions, Gronwall and comparison sequences, per-step verdicts.
//! * [`harness`]: configured runs, sweeps and their on-disk outputs.

pub mod analysis;
pub mod error;
pub mod field;
pub mod forcing;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod spectral;
pub mod stepper;
mod transform;

pub use error::{Error, Result};
