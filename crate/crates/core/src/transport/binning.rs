use alloc::vec;
use alloc::vec::Vec;

use super::DiscreteMeasure;
use crate::error::{bail, Result};
use crate::state::PhaseField;

/// A phase field aggregated into at most `cap` sites, with the exact cost
/// `A = Σ m_cell |z_cell − z_site|²` of the aggregation map, so that
/// `W₂(field, measure) ≤ √A`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMeasure {
    pub measure: DiscreteMeasure,
    pub aggregation_cost: f64,
    /// Block edge length in cells.
    pub factor: usize,
}

const TINY: f64 = 1e-16;

/// Aggregates cells in `b^d × b^d` blocks (`b = 1, 2, 4, …`) until at most
/// `cap` blocks carry mass; each block becomes one site at its barycentre.
/// Blocks below `1e-16` of the total mass are folded into the nearest kept
/// site. The field must be nonnegative.
pub fn bin_field(f: &PhaseField, cap: usize) -> Result<BinnedMeasure> {
    if f.min_value() < 0.0 {
        bail!(InvalidInput, "transport distances need a nonnegative field (min {})", f.min_value());
    }
    let g = f.grid();
    let d = g.dim();
    let total = f.mass();
    if !(total > 0.0) {
        bail!(InvalidInput, "field has no mass");
    }
    let cv = g.cell_volume();
    let (nx, nv) = (g.nx(), g.nv());
    let (mut x, mut v) = ([0.0; 3], [0.0; 3]);
    let mut b = 1usize;
    loop {
        let (bx, bv) = ((nx / b).max(1), (nv / b).max(1));
        let blocks = bx.pow(d as u32) * bv.pow(d as u32);
        let mut mass = vec![0.0; blocks];
        let mut first = vec![0.0; blocks * 2 * d];
        for (idx, val) in f.values().iter().enumerate() {
            if *val == 0.0 {
                continue;
            }
            g.coords(idx, &mut x[..d], &mut v[..d]);
            let key = block_key(idx, g, b);
            let m = val * cv / total;
            mass[key] += m;
            for k in 0..d {
                first[key * 2 * d + k] += m * x[k];
                first[key * 2 * d + d + k] += m * v[k];
            }
        }
        let occupied = mass.iter().filter(|m| **m > TINY).count();
        if occupied > cap && (b < nx || b < nv) {
            b *= 2;
            continue;
        }
        if occupied > cap {
            bail!(Resource, "cannot bin below {cap} sites");
        }
        let mut site_of = vec![usize::MAX; blocks];
        let mut points = Vec::new();
        let mut masses = Vec::new();
        for key in 0..blocks {
            if mass[key] > TINY {
                site_of[key] = masses.len();
                masses.push(mass[key]);
                points.extend(first[key * 2 * d..(key + 1) * 2 * d].iter().map(|s| s / mass[key]));
            }
        }
        let dim = 2 * d;
        let mut cost = 0.0;
        let mut z = vec![0.0; dim];
        for (idx, val) in f.values().iter().enumerate() {
            if *val == 0.0 {
                continue;
            }
            g.coords(idx, &mut x[..d], &mut v[..d]);
            z[..d].copy_from_slice(&x[..d]);
            z[d..].copy_from_slice(&v[..d]);
            let key = block_key(idx, g, b);
            let m = val * cv / total;
            let site = if site_of[key] != usize::MAX {
                site_of[key]
            } else {
                let s = nearest(&points, dim, &z);
                masses[s] += m;
                s
            };
            let p = &points[site * dim..(site + 1) * dim];
            cost += m * z.iter().zip(p).map(|(a, c)| (a - c) * (a - c)).sum::<f64>();
        }
        let s: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= s);
        return Ok(BinnedMeasure { measure: DiscreteMeasure::new(dim, points, masses)?, aggregation_cost: cost, factor: b });
    }
}

fn block_key(idx: usize, g: &crate::grid::PhaseGrid, b: usize) -> usize {
    let d = g.dim();
    let (nx, nv) = (g.nx(), g.nv());
    let (bx, bv) = ((nx / b).max(1), (nv / b).max(1));
    let nvc = g.velocity_cells();
    let (mut xi, mut vi) = (idx / nvc, idx % nvc);
    let (mut kx, mut kv) = (0usize, 0usize);
    let (mut px, mut pv) = (1usize, 1usize);
    for _ in 0..d {
        kx += ((xi % nx) / b).min(bx - 1) * px;
        kv += ((vi % nv) / b).min(bv - 1) * pv;
        xi /= nx;
        vi /= nv;
        px *= bx;
        pv *= bv;
    }
    kx * bv.pow(d as u32) + kv
}

fn nearest(points: &[f64], dim: usize, z: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (s, p) in points.chunks(dim).enumerate() {
        let d2: f64 = p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < best.0 {
            best = (d2, s);
        }
    }
    best.1
}
