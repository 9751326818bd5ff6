use alloc::vec::Vec;

use num_complex::Complex64;

use super::{mean_field, InteractionKernel};
use crate::error::{bail, Result};
use crate::fft::Fft;
use crate::state::{orthonormalize, MixedState};

/// Diagnostics of one Hartree step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HartreeReport {
    /// Orthonormality defect after propagation, before any repair.
    pub orthonormality_error: f64,
    /// Whether the vectors were re-orthonormalized.
    pub reorthonormalized: bool,
}

const DRIFT_LIMIT: f64 = 1e-6;

/// Split-step Fourier step: half potential kick, free flow over `dt`, half
/// kick with the potential of the intermediate density. Weights are never
/// touched. Refused when the kinetic phase `dt·p²/(2ħ)` at the resolved
/// momentum `p = ħ k_max / 2` exceeds `max_kinetic_phase`.
pub fn hartree_step(op: &MixedState, kernel: &InteractionKernel, dt: f64, max_kinetic_phase: f64) -> Result<(MixedState, HartreeReport)> {
    if !(dt.is_finite() && dt > 0.0) {
        bail!(InvalidInput, "time step {dt} must be positive");
    }
    let hbar = op.hbar();
    let ax = *op.axis();
    let n = ax.len();
    let p = 0.5 * hbar * ax.wavenumber(n / 2 - 1).abs();
    let phase = dt * p * p / (2.0 * hbar);
    if phase > max_kinetic_phase {
        bail!(InvalidInput, "kinetic phase {phase:.3} per step exceeds {max_kinetic_phase}; reduce dt");
    }
    let fft = Fft::new(n)?;
    let free: Vec<Complex64> = (0..n)
        .map(|j| {
            let k = ax.wavenumber(j);
            Complex64::from_polar(1.0, -hbar * k * k * dt / 2.0)
        })
        .collect();
    let kick = |state: &MixedState| -> Result<Vec<Complex64>> {
        let v = mean_field(&state.spatial_density(), kernel)?.potential;
        Ok(v.iter().map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar))).collect())
    };
    let k1 = kick(op)?;
    let mut vectors: Vec<Vec<Complex64>> = op
        .vectors()
        .iter()
        .map(|psi| {
            let mut b: Vec<Complex64> = psi.iter().zip(&k1).map(|(a, k)| a * k).collect();
            fft.forward(&mut b);
            b.iter_mut().zip(&free).for_each(|(a, f)| *a *= f);
            fft.inverse(&mut b);
            b
        })
        .collect();
    let mid = MixedState::from_parts_unchecked(hbar, ax, op.weights().to_vec(), vectors.clone());
    let k2 = kick(&mid)?;
    for v in vectors.iter_mut() {
        v.iter_mut().zip(&k2).for_each(|(a, k)| *a *= k);
    }
    let mut next = MixedState::from_parts_unchecked(hbar, ax, op.weights().to_vec(), vectors);
    let err = next.orthonormality_error();
    let mut report = HartreeReport { orthonormality_error: err, reorthonormalized: false };
    if err > DRIFT_LIMIT {
        let mut v = next.vectors().to_vec();
        orthonormalize(&mut v, ax.spacing());
        next = MixedState::from_parts_unchecked(hbar, ax, op.weights().to_vec(), v);
        let after = next.orthonormality_error();
        if after > DRIFT_LIMIT {
            bail!(Invariant, "orthonormality drift {after} persists after repair");
        }
        report.reorthonormalized = true;
    }
    Ok((next, report))
}

/// `½ h Σ w ⟨ψ|p²|ψ⟩ + ½∫ρV` and its kinetic part.
pub fn hartree_energy(op: &MixedState, kernel: &InteractionKernel) -> Result<(f64, f64)> {
    use crate::state::Moments;
    let kin = 0.5 * op.moment(2)?;
    let rho = op.spatial_density();
    let pot = mean_field(&rho, kernel)?.potential;
    let field = 0.5 * rho.values().iter().zip(&pot).map(|(r, p)| r * p).sum::<f64>() * op.axis().spacing();
    Ok((kin + field, kin))
}
