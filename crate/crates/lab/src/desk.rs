//! Small instances for the exact coupling solver: a 16-site grid, a Toeplitz
//! state of a random Gaussian bump, and a classical density on a few cells.

use std::f64::consts::PI;

use rand::Rng;
use sctl_core::transforms::toeplitz_quantize;
use sctl_core::{MixedState, PhaseField, PhaseGrid};

use crate::error::LabResult;

pub const DESK_HBAR: f64 = 0.1;
pub const DESK_SITES: usize = 16;

#[derive(Debug, Clone)]
pub struct DeskInstance {
    pub f: PhaseField,
    pub op: MixedState,
    /// Symbol whose Toeplitz quantization is `op`.
    pub symbol: PhaseField,
}

pub fn desk_grid() -> LabResult<PhaseGrid> {
    let x = (PI * DESK_HBAR * DESK_SITES as f64 / 2.0).sqrt();
    Ok(PhaseGrid::new_1d(DESK_SITES, x, DESK_SITES, x)?)
}

/// One cell of unit mass at the grid point nearest `(x0, p0)`.
pub fn dirac_cell(grid: PhaseGrid, x0: f64, p0: f64) -> LabResult<PhaseField> {
    let (i, k) = (grid.x().nearest(x0), grid.v().nearest(p0));
    let mut vals = vec![0.0; grid.cells()];
    vals[i * grid.nv() + k] = 1.0 / grid.cell_volume();
    Ok(PhaseField::probability(grid, vals)?)
}

/// Toeplitz state of a random bump against `k` random central cells.
pub fn desk_instance(rng: &mut impl Rng, k: usize) -> LabResult<DeskInstance> {
    let g = desk_grid()?;
    let s = rng.random_range(0.25..0.4);
    let (cx, cv) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    let symbol = PhaseField::normalized_from_fn(g, |x, v| (-((x[0] - cx).powi(2) + (v[0] - cv).powi(2)) / (2.0 * s * s)).exp())?;
    let op = toeplitz_quantize(&symbol, DESK_HBAR)?;
    let k = k.clamp(1, 49);
    let mut vals = vec![0.0; g.cells()];
    let mut placed = 0;
    while placed < k {
        let idx = rng.random_range(5..12) * g.nv() + rng.random_range(5..12);
        if vals[idx] == 0.0 {
            vals[idx] = rng.random_range(0.2..1.0);
            placed += 1;
        }
    }
    let tot: f64 = vals.iter().sum::<f64>() * g.cell_volume();
    let f = PhaseField::probability(g, vals.iter().map(|v| v / tot).collect())?;
    Ok(DeskInstance { f, op, symbol })
}

/// Coherent state against the cell at its centre; the distance is `√ħ`.
pub fn coherent_instance() -> LabResult<DeskInstance> {
    let g = desk_grid()?;
    let (x0, p0) = (g.x().point(DESK_SITES / 2), g.v().point(DESK_SITES / 2));
    let f = dirac_cell(g, x0, p0)?;
    let op = MixedState::coherent(DESK_HBAR, *g.x(), x0, p0)?;
    Ok(DeskInstance { symbol: f.clone(), f, op })
}
