#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sctl_core::{Axis, Complex64, MixedState, PhaseField, PhaseGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coherent_vec(hbar: f64, axis: Axis, x0: f64, p0: f64) -> Vec<Complex64> {
    MixedState::coherent(hbar, axis, x0, p0).unwrap().vectors()[0].clone()
}

/// Rank-`r` state whose vectors are random superpositions of coherent packets
/// centred in `|x| ≤ xr`, `|p| ≤ pr`.
pub fn random_state(rng: &mut ChaCha8Rng, hbar: f64, axis: Axis, rank: usize, xr: f64, pr: f64) -> MixedState {
    let mut weights = Vec::new();
    let mut vectors = Vec::new();
    for _ in 0..rank {
        let terms = rng.random_range(1..=3);
        let mut psi = vec![Complex64::new(0.0, 0.0); axis.len()];
        for _ in 0..terms {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let v = coherent_vec(hbar, axis, rng.random_range(-xr..xr), rng.random_range(-pr..pr));
            for (a, b) in psi.iter_mut().zip(&v) {
                *a += c * b;
            }
        }
        weights.push(rng.random_range(0.1..1.0));
        vectors.push(psi);
    }
    MixedState::normalized(hbar, axis, weights, vectors).unwrap()
}

/// Normalized mixture of isotropic phase Gaussians of width `s`.
pub fn gaussian_mixture(grid: PhaseGrid, centres: &[(f64, f64, f64)], s: f64) -> PhaseField {
    PhaseField::normalized_from_fn(grid, |x, v| {
        centres
            .iter()
            .map(|(w, a, b)| w * (-((x[0] - a).powi(2) + (v[0] - b).powi(2)) / (2.0 * s * s)).exp())
            .sum()
    })
    .unwrap()
}

pub fn random_mixture(rng: &mut ChaCha8Rng, grid: PhaseGrid, n: usize, xr: f64, pr: f64, s: f64) -> PhaseField {
    let c: Vec<_> = (0..n)
        .map(|_| (rng.random_range(0.2..1.0), rng.random_range(-xr..xr), rng.random_range(-pr..pr)))
        .collect();
    gaussian_mixture(grid, &c, s)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Single occupied cell nearest `(x0, p0)`, with unit mass.
pub fn dirac_cell(grid: PhaseGrid, x0: f64, p0: f64) -> PhaseField {
    let (i0, k0) = (grid.x().nearest(x0), grid.v().nearest(p0));
    let mut vals = vec![0.0; grid.cells()];
    vals[i0 * grid.nv() + k0] = 1.0 / grid.cell_volume();
    PhaseField::probability(grid, vals).unwrap()
}
