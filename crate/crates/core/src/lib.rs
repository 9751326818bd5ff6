//! Numerical core of the semiclassical transport lab.
//!
//! Phase-space grids and states, quantization maps between phase-space
//! densities and density operators, Vlasov and Hartree mean-field dynamics,
//! optimal transport distances, and certificates for the stability bounds
//! linking the two flows.
//!
//! The crate is `no_std` and only needs `alloc`. Conventions used throughout:
//! `h = 2πħ`, periodic boxes `[-X, X)`, and a density operator normalized by
//! `h^d · Tr = 1`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certify;
pub mod dd;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod grid;
pub mod linalg;
pub mod quad;
pub mod state;
pub mod transforms;
pub mod transport;

pub use error::{Error, Result};
pub use grid::{Axis, PhaseGrid};
pub use num_complex::Complex64;
pub use state::{Moments, MixedState, OperatorKernel, PhaseField, SpatialDensity, SpatialGeometry};

/// Planck's constant `h = 2πħ` for a reduced constant `hbar`.
#[inline]
pub fn planck(hbar: f64) -> f64 {
    2.0 * core::f64::consts::PI * hbar
}
