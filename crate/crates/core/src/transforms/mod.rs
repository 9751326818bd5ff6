//! Quantization and dequantization maps between phase-space functions and
//! density operators in one dimension.
//!
//! Grids must be ħ-matched: velocity spacing `πħ/(2X)` and `nv <= nx`
//! (see [`PhaseGrid::semiclassical`]).

mod husimi;
mod toeplitz;
mod weyl;
mod wigner;

pub use husimi::{gaussian_smooth, husimi_at, husimi_transform, Husimi};
pub use toeplitz::{toeplitz_kernel, toeplitz_quantize};
pub use weyl::{weyl_quantize, x_spectral_tail};
pub use wigner::{wigner_grid, wigner_of_sqrt, wigner_transform, phase_gradient_norm_sq};

use core::f64::consts::PI;

use crate::error::{bail, Result};

/// Phase-space Gaussian `g_h(z) = (πħ)^{-d} exp(-|z|²/ħ)` on `R^{2d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernelSpec {
    hbar: f64,
    dim: usize,
}

impl GaussianKernelSpec {
    pub fn new(hbar: f64, dim: usize) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            bail!(InvalidInput, "hbar {hbar} must be positive");
        }
        if dim == 0 {
            bail!(InvalidInput, "dimension must be positive");
        }
        Ok(Self { hbar, dim })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Density at a phase-space offset `z` of length `2d`.
    pub fn density(&self, z: &[f64]) -> f64 {
        let r2: f64 = z.iter().map(|a| a * a).sum();
        libm::pow(PI * self.hbar, -(self.dim as f64)) * libm::exp(-r2 / self.hbar)
    }

    /// Second moment `∫ |z|² g_h = dħ`, the transport cost of a Gaussian
    /// mollification.
    pub fn second_moment(&self) -> f64 {
        self.dim as f64 * self.hbar
    }
}
