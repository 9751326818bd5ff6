use alloc::vec::Vec;

use num_complex::Complex64;

use super::wigner::wigner_transform;
use super::GaussianKernelSpec;
use crate::error::{bail, Result};
use crate::grid::PhaseGrid;
use crate::state::{coherent_vector, MixedState, PhaseField};

/// Husimi function together with its most negative pre-clamp value.
#[derive(Debug, Clone, PartialEq)]
pub struct Husimi {
    pub field: PhaseField,
    pub raw_min: f64,
}

const CLAMP: f64 = 1e-12;

/// `g_h * f` on a one-dimensional periodic phase grid, by FFT convolution with
/// the sampled Gaussian (minimal-image offsets, unit discrete mass).
pub fn gaussian_smooth(f: &PhaseField, hbar: f64) -> Result<PhaseField> {
    let g = f.grid();
    if g.dim() != 1 {
        bail!(Unsupported, "Gaussian smoothing is implemented in one dimension");
    }
    let spec = GaussianKernelSpec::new(hbar, 1)?;
    let (nx, nv) = (g.nx(), g.nv());
    let mut kern: Vec<Complex64> = Vec::with_capacity(nx * nv);
    for i in 0..nx {
        let dx = g.x().wrap(g.x().point(i) + g.x().extent());
        for k in 0..nv {
            let dv = g.v().wrap(g.v().point(k) + g.v().extent());
            kern.push(Complex64::new(spec.density(&[dx, dv]), 0.0));
        }
    }
    let mass: f64 = kern.iter().map(|z| z.re).sum::<f64>() * g.cell_volume();
    if (mass - 1.0).abs() > 1e-6 {
        bail!(Aliasing, "sampled Gaussian has mass {mass}: grid does not resolve sqrt(hbar) or box too small");
    }
    kern.iter_mut().for_each(|z| *z /= mass);
    let mut data: Vec<Complex64> = f.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
    crate::fft::fft2(&mut kern, nx, nv, false)?;
    crate::fft::fft2(&mut data, nx, nv, false)?;
    for (a, b) in data.iter_mut().zip(&kern) {
        *a *= b;
    }
    crate::fft::fft2(&mut data, nx, nv, true)?;
    let cv = g.cell_volume();
    PhaseField::new(*g, data.iter().map(|z| z.re * cv).collect())
}

/// `f̃_op = g_h * f_op`. Values down to `-1e-12` are clamped to zero; lower
/// values are an invariant violation.
pub fn husimi_transform(op: &MixedState, grid: &PhaseGrid) -> Result<Husimi> {
    let w = wigner_transform(op, grid)?;
    let s = gaussian_smooth(&w, op.hbar())?;
    let raw_min = s.min_value();
    if raw_min < -CLAMP {
        bail!(Invariant, "Husimi function reaches {raw_min} below the clamp threshold");
    }
    let values = s.into_values().into_iter().map(|v| v.max(0.0)).collect();
    Ok(Husimi { field: PhaseField::new(*grid, values)?, raw_min })
}

/// Husimi function at one phase point, `⟨φ_z|op|φ_z⟩` with `φ_z` the
/// normalized coherent vector at `z = (x, p)`.
pub fn husimi_at(op: &MixedState, x: f64, p: f64) -> f64 {
    let ax = op.axis();
    let mut phi = coherent_vector(op.hbar(), ax, x, p);
    let dx = ax.spacing();
    let n = libm::sqrt(phi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx);
    phi.iter_mut().for_each(|z| *z /= n);
    op.weights()
        .iter()
        .zip(op.vectors())
        .map(|(w, v)| {
            let ip: Complex64 = phi.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dx;
            w * ip.norm_sqr()
        })
        .sum()
}
