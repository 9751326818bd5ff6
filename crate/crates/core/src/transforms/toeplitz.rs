use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::planck;
use crate::state::{MixedState, OperatorKernel, PhaseField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Kernel of `∫ f(z) (1/h)|φ_z⟩⟨φ_z| dz` with `φ_z` the normalized coherent
/// vector at `z`; the phase integral is the sum over grid cells.
pub fn toeplitz_kernel(f: &PhaseField, hbar: f64) -> Result<OperatorKernel> {
    let g = f.grid();
    if g.dim() != 1 {
        bail!(Unsupported, "Toeplitz quantization is implemented in one dimension");
    }
    if let Some(v) = f.values().iter().find(|v| **v < 0.0) {
        bail!(InvalidInput, "Toeplitz symbol must be nonnegative, found {v}");
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        bail!(InvalidInput, "hbar {hbar} must be positive");
    }
    let (nx, nv) = (g.nx(), g.nv());
    let ax = g.x();
    let dx = ax.spacing();
    let cell = g.cell_volume();
    // Minimal-image integer offset of grid point a from centre c.
    let rel = |a: usize, c: usize| -> isize {
        let d = (a as isize - c as isize).rem_euclid(nx as isize);
        if d >= (nx / 2) as isize {
            d - nx as isize
        } else {
            d
        }
    };
    let step: Vec<Complex64> = g.v().points().map(|v| Complex64::from_polar(1.0, v * dx / hbar)).collect();
    let mut values = vec![ZERO; nx * nx];
    let mut amp = vec![0.0; nx];
    let mut dsum = vec![ZERO; 2 * nx];
    let mut cur = vec![ZERO; nv];
    for c in 0..nx {
        let m: Vec<f64> = (0..nv).map(|k| f.at(c, k) * cell).collect();
        if m.iter().all(|w| *w == 0.0) {
            continue;
        }
        for a in 0..nx {
            let d = rel(a, c) as f64 * dx;
            amp[a] = libm::exp(-d * d / (2.0 * hbar));
        }
        let norm2: f64 = amp.iter().map(|a| a * a).sum::<f64>() * dx;
        // D(Δ) = Σ_v m_v e^{i v Δ dx/ħ} for Δ in (-nx, nx); index Δ + nx.
        cur.iter_mut().for_each(|z| *z = Complex64::new(1.0, 0.0));
        for delta in 0..nx {
            let s: Complex64 = cur.iter().zip(&m).map(|(z, w)| z * *w).sum();
            dsum[nx + delta] = s;
            dsum[nx - delta] = s.conj();
            for (z, st) in cur.iter_mut().zip(&step) {
                *z *= st;
            }
        }
        let scale = 1.0 / (planck(hbar) * norm2);
        for a in 0..nx {
            if amp[a] < 1e-300 {
                continue;
            }
            let ra = rel(a, c);
            for b in 0..nx {
                let p = amp[a] * amp[b] * scale;
                if p == 0.0 {
                    continue;
                }
                let delta = ra - rel(b, c);
                values[a * nx + b] += dsum[(delta + nx as isize) as usize] * p;
            }
        }
    }
    OperatorKernel::new(hbar, *ax, values)
}

/// Toeplitz quantization as a low-rank density operator.
pub fn toeplitz_quantize(f: &PhaseField, hbar: f64) -> Result<MixedState> {
    let mass = f.mass();
    if (mass - 1.0).abs() > 1e-8 {
        bail!(InvalidInput, "Toeplitz symbol has mass {mass}, expected 1");
    }
    toeplitz_kernel(f, hbar)?.to_mixed_state(1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhaseGrid;
    use crate::transforms::{gaussian_smooth, wigner_transform};

    #[test]
    fn smooth_symbol_wigner_is_mollified_symbol() {
        let hbar = 0.1;
        let grid = PhaseGrid::semiclassical(128, 2.5, 128, hbar).unwrap();
        let f = PhaseField::normalized_from_fn(grid, |x, v| {
            (-(x[0] - 0.3).powi(2) / 0.1 - v[0] * v[0] / 0.2).exp() + 0.5 * (-(x[0] + 0.5).powi(2) / 0.08 - (v[0] - 0.4).powi(2) / 0.1).exp()
        })
        .unwrap();
        let op = toeplitz_quantize(&f, hbar).unwrap();
        assert!((op.planck() * op.trace() - 1.0).abs() < 1e-12);
        let w = wigner_transform(&op, &grid).unwrap();
        let s = gaussian_smooth(&f, hbar).unwrap();
        let err = w.values().iter().zip(s.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }
}
