#![no_std]

//! Energy-conservative solutions of the quasilinear variational wave equation
//!
//! ```text
//! (α² u_t + β u_x)_t + (β u_t − γ² u_x)_x = α α_u u_t² + β_u u_t u_x − γ γ_u u_x²
//! ```
//!
//! built by integrating a semilinear system in energy-weighted characteristic
//! coordinates `(X, Y)` and mapping the result back to physical `(t, x)`.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the `conswave` companion crate.
//!
//! Module map:
//! - [`coeffs`]: coefficient fields, wave speeds, source coefficients, bounds.
//! - [`initdata`]: initial data, Riemann variables, cumulative energy coordinates
//!   and boundary data along the initial curve.
//! - [`goursat`]: the lattice solver in characteristic coordinates.
//! - [`physmap`]: isochrones, Jacobian, Riemann reconstruction, sampling of `u(t, x)`.
//! - [`diagnostics`]: energy, interaction potential, balance residuals,
//!   concentration events, Hölder estimates.
//! - [`chartrace`]: characteristics traced in the energy variables.
//! - [`fdoracle`]: an independent finite-difference solver for the smooth regime.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chartrace;
pub mod coeffs;
pub mod diagnostics;
mod error;
pub mod fdoracle;
pub mod goursat;
pub mod initdata;
pub mod math;
pub mod physmap;

pub use error::{Error, Result};
