use alloc::vec;
use alloc::vec::Vec;

use super::spline::shift_periodic;
use super::{mean_field, InteractionKernel};
use crate::error::{bail, Error, Result};
use crate::state::PhaseField;

/// Diagnostics of one Vlasov step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlasovReport {
    /// Smallest value of the new field (splines do not preserve positivity).
    pub min_value: f64,
    pub mass_before: f64,
    pub mass_after: f64,
}

/// Strang-split semi-Lagrangian step: free transport over `dt/2`, velocity
/// kick over `dt` with the field of the intermediate density, free transport
/// over `dt/2`. Refused when `dt·max|ξ| > cfl_safety·dx`.
pub fn vlasov_step(f: &PhaseField, kernel: &InteractionKernel, dt: f64, cfl_safety: f64) -> Result<(PhaseField, VlasovReport)> {
    let g = *f.grid();
    if g.dim() != 1 {
        bail!(Unsupported, "Vlasov steps are implemented in one dimension");
    }
    if !(dt.is_finite() && dt > 0.0) {
        bail!(InvalidInput, "time step {dt} must be positive");
    }
    let vmax = g.v().extent();
    let dx = g.x().spacing();
    if dt * vmax > cfl_safety * dx {
        return Err(Error::Cfl { dt, suggested: cfl_safety * dx / vmax });
    }
    let (nx, nv) = (g.nx(), g.nv());
    let mut vals = f.values().to_vec();
    advect_x(&mut vals, &g, 0.5 * dt);
    let mid = PhaseField::new(g, vals)?;
    let e = mean_field(&mid.spatial_density(), kernel)?.force;
    let mut vals = mid.into_values();
    let dv = g.v().spacing();
    let mut out = vec![0.0; nv];
    for i in 0..nx {
        let row = &mut vals[i * nv..(i + 1) * nv];
        shift_periodic(row, e[i] * dt / dv, &mut out);
        row.copy_from_slice(&out);
    }
    advect_x(&mut vals, &g, 0.5 * dt);
    let next = PhaseField::new(g, vals)?;
    let report = VlasovReport { min_value: next.min_value(), mass_before: f.mass(), mass_after: next.mass() };
    Ok((next, report))
}

fn advect_x(vals: &mut [f64], g: &crate::grid::PhaseGrid, dt: f64) {
    let (nx, nv) = (g.nx(), g.nv());
    let dx = g.x().spacing();
    let mut line = vec![0.0; nx];
    let mut out = vec![0.0; nx];
    for k in 0..nv {
        let v = g.v().point(k);
        for i in 0..nx {
            line[i] = vals[i * nv + k];
        }
        shift_periodic(&line, v * dt / dx, &mut out);
        for i in 0..nx {
            vals[i * nv + k] = out[i];
        }
    }
}

/// `½∫|ξ|² f + ½∫ ρ_f V` and its kinetic part.
pub fn vlasov_energy(f: &PhaseField, kernel: &InteractionKernel) -> Result<(f64, f64)> {
    let g = f.grid();
    let nv = g.nv();
    let v2: Vec<f64> = g.v().points().map(|v| v * v).collect();
    let kin = 0.5 * f.values().chunks(nv).map(|row| row.iter().zip(&v2).map(|(a, b)| a * b).sum::<f64>()).sum::<f64>() * g.cell_volume();
    let rho = f.spatial_density();
    let pot = mean_field(&rho, kernel)?.potential;
    let field = 0.5 * rho.values().iter().zip(&pot).map(|(r, p)| r * p).sum::<f64>() * g.x().spacing();
    Ok((kin + field, kin))
}
