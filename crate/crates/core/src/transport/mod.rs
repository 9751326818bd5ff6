//! Optimal transport distances and estimators of the semiclassical
//! pseudometric `W_ħ` between a phase-space density and a density operator.

mod binning;
mod marginal;
mod pseudometric;
mod sdp;
pub mod simplex;
pub mod sinkhorn;

pub use binning::{bin_field, BinnedMeasure};
pub use marginal::{marginal_w2_check, w2_line};
pub use pseudometric::{
    husimi_on_grid, lower_from_w2, wh_lower, wh_upper_toeplitz, LowerEstimate, UpperEstimate, UpperMethod, WhEstimate,
};
pub use sdp::{wh_exact_sdp, CouplingProblem, SdpOptions, SdpOutcome, SemiclassicalCoupling};

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::state::PhaseField;

/// Probability vector on points of `R^dim`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    /// `points` is flattened (`dim` coordinates per site); masses must be
    /// nonnegative with total one to 1e-9.
    pub fn new(dim: usize, points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() != dim * masses.len() || masses.is_empty() {
            bail!(InvalidInput, "need {dim} coordinates per site and at least one site");
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) || points.iter().any(|p| !p.is_finite()) {
            bail!(InvalidInput, "masses must be nonnegative and coordinates finite");
        }
        let s: f64 = masses.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            bail!(InvalidInput, "total mass {s} differs from 1");
        }
        Ok(Self { dim, points, masses })
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), alloc::vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn sq_dist(&self, i: usize, other: &DiscreteMeasure, j: usize) -> f64 {
        self.point(i).iter().zip(other.point(j)).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn cost_to(&self, other: &DiscreteMeasure) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.len() * other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                c.push(self.sq_dist(i, other, j));
            }
        }
        c
    }

    /// The measure with the same masses on translated points.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let points = self.points.chunks(self.dim).flat_map(|p| p.iter().zip(shift).map(|(a, b)| a + b)).collect();
        Self { dim: self.dim, points, masses: self.masses.clone() }
    }
}

/// Coupling of two discrete measures with its squared-distance cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    /// Sparse entries `(i, j, mass)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl TransportPlan {
    /// Largest deviation of row and column sums from the marginals.
    pub fn marginal_error(&self) -> f64 {
        let mut rows = alloc::vec![0.0; self.source.len()];
        let mut cols = alloc::vec![0.0; self.target.len()];
        for &(i, j, m) in &self.entries {
            rows[i] += m;
            cols[j] += m;
        }
        let r = rows.iter().zip(self.source.masses()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = cols.iter().zip(self.target.masses()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    /// `Σ π_ij |z_i - z_j|²` recomputed from the entries.
    pub fn recomputed_cost(&self) -> f64 {
        self.entries.iter().map(|&(i, j, m)| m * self.source.sq_dist(i, &self.target, j)).sum()
    }
}

/// Solver selection for [`w2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct W2Options {
    /// Largest `max(n, m)` solved exactly.
    pub exact_cap: usize,
    /// Largest `max(n, m)` accepted by the entropic solver.
    pub entropic_cap: usize,
    /// Maximal width of the entropic bracket on `W₂`.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for W2Options {
    fn default() -> Self {
        Self { exact_cap: 2048, entropic_cap: 4096, tolerance: 1e-3, max_iters: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum W2Method {
    Exact,
    Entropic,
}

/// `W₂` value with a certified bracket on it.
#[derive(Debug, Clone, PartialEq)]
pub struct W2Result {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: W2Method,
    /// Primal minus certified dual on the squared cost (exact mode).
    pub gap: f64,
    pub plan: TransportPlan,
}

/// 2-Wasserstein distance between discrete probability measures.
pub fn w2(mu: &DiscreteMeasure, nu: &DiscreteMeasure, opts: &W2Options) -> Result<W2Result> {
    if mu.dim != nu.dim {
        bail!(InvalidInput, "measures live in dimensions {} and {}", mu.dim, nu.dim);
    }
    let size = mu.len().max(nu.len());
    let cost = mu.cost_to(nu);
    if size <= opts.exact_cap {
        let s = simplex::solve(&mu.masses, &nu.masses, &cost)?;
        let gap = (s.primal - s.dual).max(0.0);
        let plan = TransportPlan { source: mu.clone(), target: nu.clone(), entries: s.flows, cost: s.primal };
        let value = libm::sqrt(s.primal.max(0.0));
        return Ok(W2Result { value, lower: libm::sqrt(s.dual.max(0.0)), upper: value, method: W2Method::Exact, gap, plan });
    }
    if size > opts.entropic_cap {
        bail!(Resource, "{size} sites exceed the entropic cap {}", opts.entropic_cap);
    }
    let s = sinkhorn::solve(&mu.masses, &nu.masses, &cost, &mu.cost_to(mu), &nu.cost_to(nu), opts.max_iters)?;
    let (lo, hi) = (libm::sqrt(s.lower.max(0.0)), libm::sqrt(s.upper.max(0.0)));
    if hi - lo > opts.tolerance {
        bail!(NoConvergence, "entropic bracket [{lo}, {hi}] wider than {}", opts.tolerance);
    }
    let value = libm::sqrt(s.divergence.max(0.0)).clamp(lo, hi);
    let plan = TransportPlan { source: mu.clone(), target: nu.clone(), entries: s.plan, cost: s.upper };
    Ok(W2Result { value, lower: lo, upper: hi, method: W2Method::Entropic, gap: s.upper - s.lower, plan })
}

/// Certified bracket on `W₂` between two phase-space probability densities,
/// accounting for the binning of each field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDistance {
    pub lower: f64,
    pub upper: f64,
    /// Distance between the binned measures.
    pub binned: f64,
}

/// `W₂(f, g)` for nonnegative fields (cells as point masses at their
/// centres), binned to at most `bin_cap` sites each.
pub fn w2_fields(f: &PhaseField, g: &PhaseField, bin_cap: usize, opts: &W2Options) -> Result<FieldDistance> {
    let bf = bin_field(f, bin_cap)?;
    let bg = bin_field(g, bin_cap)?;
    let r = w2(&bf.measure, &bg.measure, opts)?;
    let slack = libm::sqrt(bf.aggregation_cost) + libm::sqrt(bg.aggregation_cost);
    Ok(FieldDistance { lower: (r.lower - slack).max(0.0), upper: r.upper + slack, binned: r.value })
}
