//! Continuous data assimilation (nudging) for the two-dimensional periodic
//! incompressible Navier–Stokes equations driven by noisy observations.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: Fourier representation of divergence-free, zero-mean
//!   periodic velocity fields, the Leray projector, Stokes operator powers,
//!   the dealiased advection term and norms.
//! - [`observables`]: volume-element and nodal observation operators, step
//!   and mollified lifting bases, the oversampling average and empirical
//!   checks of the interpolation estimates.
//! - [`noise`]: counter-based Brownian increments, the lifted Q-Wiener
//!   process, covariance traces and the auxiliary Ornstein–Uhlenbeck process.
//! - [`dynamics`]: exponential-Euler stepping of the reference and nudged
//!   equations, spin-up and a-priori diagnostics.
//! - [`harness`]: parameter selection, Monte Carlo ensembles, bound
//!   evaluation and constant calibration.
//! - [`cli`]: configuration files, replay of observation logs and artifact
//!   emission for the `nudge` binary.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod noise;
pub mod observables;
pub mod spectral;

pub use error::{Error, Result};
