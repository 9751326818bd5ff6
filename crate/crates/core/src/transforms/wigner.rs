use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::fft::{upsample, wavenumber, Fft};
use crate::grid::{Axis, PhaseGrid};
use crate::state::{MixedState, PhaseField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Byte budget for the half-grid copies of the rank vectors.
const MEMORY_BUDGET: usize = 1 << 31;

/// ħ-matched phase grid on the state's position axis with `nv` velocities.
pub fn wigner_grid(op: &MixedState, nv: usize) -> Result<PhaseGrid> {
    PhaseGrid::semiclassical(op.axis().len(), op.axis().extent(), nv, op.hbar())
}

/// `f_op(x, ξ) = ∫ e^{-iyξ/ħ} op(x + y/2, x - y/2) dy`.
pub fn wigner_transform(op: &MixedState, grid: &PhaseGrid) -> Result<PhaseField> {
    let values = wigner_weighted(op.hbar(), op.axis(), op.weights(), op.vectors(), grid)?;
    PhaseField::new(*grid, values)
}

/// Wigner function of `√op` (same eigenvectors, weights `√w_j`).
pub fn wigner_of_sqrt(op: &MixedState, grid: &PhaseGrid) -> Result<PhaseField> {
    let w: Vec<f64> = op.weights().iter().map(|w| libm::sqrt(*w)).collect();
    let values = wigner_weighted(op.hbar(), op.axis(), &w, op.vectors(), grid)?;
    PhaseField::new(*grid, values)
}

pub(crate) fn wigner_weighted(
    hbar: f64,
    axis: &Axis,
    weights: &[f64],
    vectors: &[Vec<Complex64>],
    grid: &PhaseGrid,
) -> Result<Vec<f64>> {
    if grid.x() != axis {
        bail!(Mismatch, "phase grid position axis differs from the state's grid");
    }
    grid.check_hbar_matched(hbar)?;
    let nx = axis.len();
    let m = 2 * nx;
    let need = vectors.len().saturating_mul(m).saturating_mul(16);
    if need > MEMORY_BUDGET {
        bail!(Resource, "rank {} on {nx} points needs {need} bytes", vectors.len());
    }
    let fine: Vec<Vec<Complex64>> = vectors.iter().map(|v| upsample(v, 2)).collect::<Result<_>>()?;
    let fft = Fft::new(m)?;
    let dx = axis.spacing();
    let nv = grid.nv();
    let mut out = vec![0.0; nx * nv];
    let mut buf = vec![ZERO; m];
    for i in 0..nx {
        buf.iter_mut().for_each(|z| *z = ZERO);
        let c = 2 * i as isize;
        for mm in -(nx as isize)..(nx as isize) {
            let (sp, sm) = (c + mm, c - mm);
            if sp < 0 || sm < 0 || sp >= m as isize || sm >= m as isize {
                continue;
            }
            let mut acc = ZERO;
            for (w, v) in weights.iter().zip(&fine) {
                acc += v[sp as usize] * v[sm as usize].conj() * *w;
            }
            buf[mm.rem_euclid(m as isize) as usize] = acc;
        }
        fft.forward(&mut buf);
        for k in 0..nv {
            let q = (k as isize - (nv / 2) as isize).rem_euclid(m as isize) as usize;
            out[i * nv + k] = buf[q].re * dx;
        }
    }
    Ok(out)
}

/// `‖∇f‖²_{L²}` of a one-dimensional phase field by spectral differentiation
/// in both variables.
pub fn phase_gradient_norm_sq(f: &PhaseField) -> Result<f64> {
    let g = f.grid();
    if g.dim() != 1 {
        bail!(Unsupported, "gradient norm is implemented in one dimension");
    }
    let (nx, nv) = (g.nx(), g.nv());
    let mut buf: Vec<Complex64> = f.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
    crate::fft::fft2(&mut buf, nx, nv, false)?;
    let (kx0, kv0) = (g.x().wavenumber(1), g.v().wavenumber(1));
    let mut s = 0.0;
    for i in 0..nx {
        let kx = kx0 * wavenumber(i, nx);
        for j in 0..nv {
            let kv = kv0 * wavenumber(j, nv);
            s += (kx * kx + kv * kv) * buf[i * nv + j].norm_sqr();
        }
    }
    // Parseval: Σ|f|² = Σ|F|²/(nx nv).
    Ok(s / (nx * nv) as f64 * g.cell_volume())
}
