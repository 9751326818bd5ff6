use alloc::vec::Vec;

use super::WhEstimate;
use crate::certify::{Certificate, InputDigest};
use crate::error::{bail, Result};
use crate::state::{MixedState, PhaseField, SpatialDensity, SpatialGeometry};

/// Exact `W₂` between two discrete measures on the line (monotone coupling).
/// Masses are normalized to one.
pub fn w2_line(xs: &[f64], a: &[f64], ys: &[f64], b: &[f64]) -> Result<f64> {
    if xs.len() != a.len() || ys.len() != b.len() || xs.is_empty() || ys.is_empty() {
        bail!(InvalidInput, "points and masses must be nonempty and of equal length");
    }
    if a.iter().chain(b).any(|m| !(*m >= 0.0)) {
        bail!(InvalidInput, "masses must be nonnegative");
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if !(sa > 0.0 && sb > 0.0) {
        bail!(InvalidInput, "measures must have positive mass");
    }
    let sorted = |p: &[f64], m: &[f64], s: f64| {
        let mut v: Vec<(f64, f64)> = p.iter().zip(m).filter(|(_, m)| **m > 0.0).map(|(p, m)| (*p, m / s)).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    };
    let (u, v) = (sorted(xs, a, sa), sorted(ys, b, sb));
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (u[0].1, v[0].1);
    let mut cost = 0.0;
    while i < u.len() && j < v.len() {
        let m = ra.min(rb);
        let d = u[i].0 - v[j].0;
        cost += m * d * d;
        ra -= m;
        rb -= m;
        if ra <= rb {
            i += 1;
            if i < u.len() {
                ra += u[i].1;
            }
        } else {
            j += 1;
            if j < v.len() {
                rb += v[j].1;
            }
        }
    }
    Ok(libm::sqrt(cost.max(0.0)))
}

fn cell_masses(rho: &SpatialDensity) -> Result<(Vec<f64>, Vec<f64>)> {
    match rho.geometry() {
        SpatialGeometry::Periodic { dim: 1, axis } => {
            let dx = axis.spacing();
            Ok((rho.positions(), rho.values().iter().map(|v| v * dx).collect()))
        }
        _ => bail!(Unsupported, "position marginals are compared on one-dimensional grids only"),
    }
}

/// Certificate that `W₂(ρ_f, ρ) ≤ W_ħ(f, op)`: against the SDP value (minus
/// its gap) when present, otherwise against the upper estimate. The line
/// distance is used, which dominates the periodic one.
pub fn marginal_w2_check(f: &PhaseField, op: &MixedState, estimate: &WhEstimate) -> Result<Certificate> {
    let (xs, a) = cell_masses(&f.spatial_density())?;
    let (ys, b) = cell_masses(&op.spatial_density())?;
    let w = w2_line(&xs, &a, &ys, &b)?;
    let digest = InputDigest::new().str("marginal_w2").f64s(f.values()).f64(op.hbar()).f64s(op.weights()).f64(estimate.upper);
    let (bound, against) = match (estimate.exact, estimate.gap) {
        (Some(e), gap) => (e - gap.unwrap_or(0.0).abs(), "exact"),
        (None, _) => (estimate.upper, "upper"),
    };
    let mut cert = Certificate::check("marginal_w2", digest, bound, w, 1e-9).metric("upper", estimate.upper).metric("upper_margin", estimate.upper - w);
    if let Some(e) = estimate.exact {
        cert = cert.metric("exact", e).metric("exact_margin", e - w);
    }
    Ok(cert.note(alloc::format!("compared against the {against} estimate")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_distance_of_translates() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.5, 1.5, 2.5];
        let m = [0.2, 0.5, 0.3];
        assert!((w2_line(&xs, &m, &ys, &m).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn split_mass_matches_hand_value() {
        // δ0 against (δ-1 + δ1)/2 costs 1.
        let w = w2_line(&[0.0], &[1.0], &[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }
}
