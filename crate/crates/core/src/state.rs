//! Phase-space fields, low-rank density operators and spatial densities.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::fft::Fft;
use crate::grid::{Axis, PhaseGrid};
use crate::linalg::{eigh, CMatrix};
use crate::planck;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real function sampled on a phase grid. Layout: position multi-index major,
/// then velocity multi-index (`values[ix * nv + iv]` in one dimension).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<f64>,
    mass: f64,
}

impl PhaseField {
    /// Any finite field (signed fields such as Wigner functions are allowed).
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            bail!(InvalidInput, "expected {} values, got {}", grid.cells(), values.len());
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            bail!(InvalidInput, "non-finite value at cell {i}");
        }
        let mass = values.iter().sum::<f64>() * grid.cell_volume();
        Ok(Self { grid, values, mass })
    }

    /// A probability density: nonnegative with unit mass to 1e-12.
    pub fn probability(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        let f = Self::new(grid, values)?;
        if let Some(v) = f.values.iter().find(|v| **v < 0.0) {
            bail!(InvalidInput, "probability density has negative value {v}");
        }
        if libm::fabs(f.mass - 1.0) > 1e-12 {
            bail!(InvalidInput, "probability density has mass {}", f.mass);
        }
        Ok(f)
    }

    /// Samples a nonnegative function and rescales it to unit mass.
    pub fn normalized_from_fn<F: Fn(&[f64], &[f64]) -> f64>(grid: PhaseGrid, f: F) -> Result<Self> {
        let mut values = Self::sample(&grid, f);
        let s = values.iter().sum::<f64>() * grid.cell_volume();
        if !(s > 0.0 && s.is_finite()) {
            bail!(InvalidInput, "function has no positive mass on the grid");
        }
        values.iter_mut().for_each(|v| *v /= s);
        Self::probability(grid, values)
    }

    /// Samples a function without normalization.
    pub fn from_fn<F: Fn(&[f64], &[f64]) -> f64>(grid: PhaseGrid, f: F) -> Result<Self> {
        Self::new(grid, Self::sample(&grid, f))
    }

    fn sample<F: Fn(&[f64], &[f64]) -> f64>(grid: &PhaseGrid, f: F) -> Vec<f64> {
        let d = grid.dim();
        let (mut x, mut v) = ([0.0; 3], [0.0; 3]);
        (0..grid.cells())
            .map(|i| {
                grid.coords(i, &mut x[..d], &mut v[..d]);
                f(&x[..d], &v[..d])
            })
            .collect()
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= 0.0)
    }

    /// Negative values clipped to zero and the result rescaled to unit
    /// mass, with the clipped mass. Spline advection leaves small negative
    /// undershoots that transport solvers do not accept.
    pub fn positive_part(&self) -> Result<(PhaseField, f64)> {
        let clipped = self.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() * self.grid.cell_volume();
        let vals: Vec<f64> = self.values.iter().map(|v| v.max(0.0)).collect();
        let s = vals.iter().sum::<f64>() * self.grid.cell_volume();
        if !(s > 0.0) {
            bail!(InvalidInput, "field has no positive mass");
        }
        Ok((Self::probability(self.grid, vals.into_iter().map(|v| v / s).collect())?, clipped))
    }

    /// One-dimensional accessor.
    pub fn at(&self, ix: usize, iv: usize) -> f64 {
        self.values[ix * self.grid.nv() + iv]
    }

    /// Velocity marginal `ρ_f(x) = ∫ f(x, ξ) dξ`.
    pub fn spatial_density(&self) -> SpatialDensity {
        let nvc = self.grid.velocity_cells();
        let dv = self.grid.velocity_cell_volume();
        let values: Vec<f64> = self.values.chunks(nvc).map(|c| c.iter().sum::<f64>() * dv).collect();
        let mass = values.iter().sum::<f64>() * self.grid.position_cell_volume();
        SpatialDensity {
            geometry: SpatialGeometry::Periodic { dim: self.grid.dim(), axis: *self.grid.x() },
            values,
            mass,
        }
    }

    /// Mass in the outer band of relative width `band` on any axis.
    pub fn margin_mass(&self, band: f64) -> f64 {
        let d = self.grid.dim();
        let (xl, vl) = (self.grid.x().extent() * (1.0 - band), self.grid.v().extent() * (1.0 - band));
        let (mut x, mut v) = ([0.0; 3], [0.0; 3]);
        let mut s = 0.0;
        for (i, f) in self.values.iter().enumerate() {
            self.grid.coords(i, &mut x[..d], &mut v[..d]);
            if x[..d].iter().any(|a| libm::fabs(*a) >= xl) || v[..d].iter().any(|a| libm::fabs(*a) >= vl) {
                s += libm::fabs(*f);
            }
        }
        s * self.grid.cell_volume()
    }

    /// L² norm squared.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
    }

    /// Pointwise linear combination `a·self + b·other` on the same grid.
    pub fn combine(&self, a: f64, other: &PhaseField, b: f64) -> Result<PhaseField> {
        if self.grid != other.grid {
            bail!(Mismatch, "phase fields live on different grids");
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        PhaseField::new(self.grid, values)
    }
}

/// Integral kernel `op(x_a, x_b)` of an operator on a one-dimensional
/// spatial grid, stored densely (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel {
    hbar: f64,
    axis: Axis,
    values: Vec<Complex64>,
}

impl OperatorKernel {
    pub fn new(hbar: f64, axis: Axis, values: Vec<Complex64>) -> Result<Self> {
        let n = axis.len();
        if values.len() != n * n {
            bail!(InvalidInput, "kernel needs {} entries, got {}", n * n, values.len());
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            bail!(InvalidInput, "kernel has non-finite entries");
        }
        Ok(Self { hbar, axis, values })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.values[a * self.axis.len() + b]
    }

    /// Matrix of the operator in the orthonormal basis `√dx·δ_a`.
    pub fn matrix(&self) -> CMatrix {
        let n = self.axis.len();
        let dx = self.axis.spacing();
        DMatrix::from_fn(n, n, |a, b| self.entry(a, b) * dx)
    }

    /// `h · Tr(op)`.
    pub fn scaled_trace(&self) -> f64 {
        let n = self.axis.len();
        planck(self.hbar) * (0..n).map(|a| self.entry(a, a).re).sum::<f64>() * self.axis.spacing()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.axis.len();
        let mut e: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                e = e.max((self.entry(a, b) - self.entry(b, a).conj()).norm());
            }
        }
        e
    }

    /// `sqrt(h · Tr((A − B)²))`, the scaled Hilbert–Schmidt distance.
    pub fn scaled_hs_distance(&self, other: &OperatorKernel) -> Result<f64> {
        if self.axis != other.axis {
            bail!(Mismatch, "kernels live on different grids");
        }
        let dx = self.axis.spacing();
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok(libm::sqrt(planck(self.hbar) * s * dx * dx))
    }

    /// `sqrt(h · Tr(A²))`.
    pub fn scaled_hs_norm(&self) -> f64 {
        let dx = self.axis.spacing();
        let s: f64 = self.values.iter().map(|a| a.norm_sqr()).sum();
        libm::sqrt(planck(self.hbar) * s * dx * dx)
    }

    /// Eigen-decomposition into a density operator. Eigenvalues below
    /// `-negativity_tol · λ_max` are refused; smaller negative and tiny
    /// positive ones are dropped and the trace restored to one.
    pub fn to_mixed_state(&self, negativity_tol: f64) -> Result<MixedState> {
        let (vals, vecs) = eigh(&self.matrix());
        let lmax = vals.last().copied().unwrap_or(0.0);
        if !(lmax > 0.0) {
            bail!(Invariant, "operator has no positive spectrum");
        }
        if vals[0] < -negativity_tol * lmax {
            bail!(Invariant, "operator has eigenvalue {} (largest {lmax})", vals[0]);
        }
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        let s = 1.0 / libm::sqrt(self.axis.spacing());
        for (k, &lam) in vals.iter().enumerate().rev() {
            if lam <= 1e-14 * lmax {
                break;
            }
            weights.push(lam);
            vectors.push(vecs.column(k).iter().map(|z| z * s).collect());
        }
        orthonormalize(&mut vectors, self.axis.spacing());
        MixedState::normalized(self.hbar, self.axis, weights, vectors)
    }
}

/// Low-rank density operator `op = Σ_j w_j |ψ_j⟩⟨ψ_j|` on a one-dimensional
/// periodic grid with `Σ |ψ_j|² dx = 1` and `h · Σ w_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    hbar: f64,
    axis: Axis,
    weights: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
}

impl MixedState {
    /// Validates every invariant: nonnegative weights, orthonormal vectors to
    /// 1e-10 and `h · Σ w = 1` to 1e-10.
    pub fn new(hbar: f64, axis: Axis, weights: Vec<f64>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let s = Self::unchecked(hbar, axis, weights, vectors)?;
        let err = s.orthonormality_error();
        if err > 1e-10 {
            bail!(Invariant, "vectors deviate from orthonormality by {err}");
        }
        let t = planck(hbar) * s.weights.iter().sum::<f64>();
        if libm::fabs(t - 1.0) > 1e-10 {
            bail!(Invariant, "h * trace = {t}, expected 1");
        }
        Ok(s)
    }

    fn unchecked(hbar: f64, axis: Axis, weights: Vec<f64>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            bail!(InvalidInput, "hbar {hbar} must be positive");
        }
        if weights.len() != vectors.len() || weights.is_empty() {
            bail!(InvalidInput, "need one weight per vector and at least one vector");
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            bail!(Invariant, "weight {w} is negative or non-finite");
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != axis.len()) {
            bail!(InvalidInput, "vector of length {} on a grid of {}", v.len(), axis.len());
        }
        Ok(Self { hbar, axis, weights, vectors })
    }

    /// Builds a state from arbitrary nonnegative weights and linearly
    /// independent (not necessarily orthonormal) vectors, then rescales the
    /// trace to `1/h`.
    pub fn normalized(hbar: f64, axis: Axis, weights: Vec<f64>, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let raw = Self::unchecked(hbar, axis, weights, vectors)?;
        let n = axis.len();
        let r = raw.rank();
        let sdx = libm::sqrt(axis.spacing());
        // A = [√w_j √dx ψ_j]; op matrix = A A†; eigenpairs from the Gram matrix A†A.
        let a = DMatrix::from_fn(n, r, |i, j| raw.vectors[j][i] * (libm::sqrt(raw.weights[j]) * sdx));
        let (mu, u) = eigh(&(a.adjoint() * &a));
        let mmax = mu.last().copied().unwrap_or(0.0);
        if !(mmax > 0.0) {
            bail!(InvalidInput, "state has zero trace");
        }
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for k in (0..r).rev() {
            if mu[k] <= 1e-14 * mmax {
                break;
            }
            let col = &a * u.column(k);
            let s = 1.0 / (libm::sqrt(mu[k]) * sdx);
            weights.push(mu[k]);
            vectors.push(col.iter().map(|z| z * s).collect());
        }
        orthonormalize(&mut vectors, axis.spacing());
        let t = planck(hbar) * weights.iter().sum::<f64>();
        weights.iter_mut().for_each(|w| *w /= t);
        Self::new(hbar, axis, weights, vectors)
    }

    /// Pure state `(1/h)|ψ⟩⟨ψ|` with ψ normalized on the grid.
    pub fn pure(hbar: f64, axis: Axis, psi: Vec<Complex64>) -> Result<Self> {
        Self::normalized(hbar, axis, vec![1.0], vec![psi])
    }

    /// Coherent state centred at `(x0, p0)`: `ψ ∝ exp(−d²/(2ħ) + i p0 d/ħ)` with
    /// `d` the minimal-image offset from `x0`.
    pub fn coherent(hbar: f64, axis: Axis, x0: f64, p0: f64) -> Result<Self> {
        Self::pure(hbar, axis, coherent_vector(hbar, &axis, x0, p0))
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn planck(&self) -> f64 {
        planck(self.hbar)
    }

    /// `Σ w_j` (so `h · trace() = 1`).
    pub fn trace(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `h · Tr(op²)`.
    pub fn scaled_purity(&self) -> f64 {
        self.planck() * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    pub fn orthonormality_error(&self) -> f64 {
        let dx = self.axis.spacing();
        let mut e: f64 = 0.0;
        for i in 0..self.rank() {
            for j in i..self.rank() {
                let ip: Complex64 = self.vectors[i].iter().zip(&self.vectors[j]).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dx;
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((ip - target).norm());
            }
        }
        e
    }

    /// `ρ(x) = h Σ w_j |ψ_j(x)|²`.
    pub fn spatial_density(&self) -> SpatialDensity {
        let h = self.planck();
        let mut values = vec![0.0; self.axis.len()];
        for (w, v) in self.weights.iter().zip(&self.vectors) {
            for (r, z) in values.iter_mut().zip(v) {
                *r += h * w * z.norm_sqr();
            }
        }
        let mass = values.iter().sum::<f64>() * self.axis.spacing();
        SpatialDensity { geometry: SpatialGeometry::Periodic { dim: 1, axis: self.axis }, values, mass }
    }

    /// Dense integral kernel `Σ w_j ψ_j(x) ψ_j(y)*`.
    pub fn kernel(&self) -> OperatorKernel {
        let n = self.axis.len();
        let mut values = vec![ZERO; n * n];
        for (w, v) in self.weights.iter().zip(&self.vectors) {
            for a in 0..n {
                let va = v[a] * *w;
                for b in 0..n {
                    values[a * n + b] += va * v[b].conj();
                }
            }
        }
        OperatorKernel { hbar: self.hbar, axis: self.axis, values }
    }

    /// Mass of ρ in the outer band of relative width `band`.
    pub fn margin_mass(&self, band: f64) -> f64 {
        let rho = self.spatial_density();
        let lim = self.axis.extent() * (1.0 - band);
        let dx = self.axis.spacing();
        self.axis.points().zip(&rho.values).filter(|(x, _)| libm::fabs(*x) >= lim).map(|(_, r)| r * dx).sum()
    }

    /// Momentum-space probabilities `|ψ̂_j(k)|²` (summing to one per vector),
    /// at momenta `ħ·k_n`.
    pub fn momentum_distribution(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.axis.len();
        let fft = Fft::new(n)?;
        let dx = self.axis.spacing();
        Ok(self
            .vectors
            .iter()
            .map(|v| {
                let mut buf = v.clone();
                fft.forward(&mut buf);
                buf.iter().map(|z| z.norm_sqr() * dx / n as f64).collect()
            })
            .collect())
    }

    pub(crate) fn from_parts_unchecked(hbar: f64, axis: Axis, weights: Vec<f64>, vectors: Vec<Vec<Complex64>>) -> Self {
        Self { hbar, axis, weights, vectors }
    }
}

/// Two passes of modified Gram–Schmidt in the `dx`-weighted inner product,
/// keeping the order (leading vectors change least).
pub(crate) fn orthonormalize(vectors: &mut [Vec<Complex64>], dx: f64) {
    for _ in 0..2 {
        for i in 0..vectors.len() {
            let (done, rest) = vectors.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let ip: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dx;
                for (b, a) in v.iter_mut().zip(u) {
                    *b -= a * ip;
                }
            }
            let n = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx);
            v.iter_mut().for_each(|z| *z /= n);
        }
    }
}

pub(crate) fn coherent_vector(hbar: f64, axis: &Axis, x0: f64, p0: f64) -> Vec<Complex64> {
    axis.points()
        .map(|x| {
            let d = axis.wrap(x - x0);
            Complex64::from_polar(libm::exp(-d * d / (2.0 * hbar)), p0 * d / hbar)
        })
        .collect()
}

/// Where a spatial density lives.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SpatialGeometry {
    /// `dim`-dimensional periodic box with the given axis in every direction.
    Periodic { dim: usize, axis: Axis },
    /// Radially symmetric profile in three dimensions on cells centred at
    /// `r_i = (i + 1/2) r_max / n`.
    Radial { n: usize, r_max: f64 },
}

/// Nonnegative position density.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpatialDensity {
    geometry: SpatialGeometry,
    values: Vec<f64>,
    mass: f64,
}

impl SpatialDensity {
    /// Values at or above `-1e-14` are accepted and clamped to zero.
    pub fn new(geometry: SpatialGeometry, mut values: Vec<f64>) -> Result<Self> {
        let expected = match geometry {
            SpatialGeometry::Periodic { dim, axis } => axis.len().pow(dim as u32),
            SpatialGeometry::Radial { n, r_max } => {
                if n == 0 || !(r_max > 0.0) {
                    bail!(InvalidInput, "radial grid needs n > 0 and r_max > 0");
                }
                n
            }
        };
        if values.len() != expected {
            bail!(InvalidInput, "expected {expected} density values, got {}", values.len());
        }
        for v in values.iter_mut() {
            if !v.is_finite() || *v < -1e-14 {
                bail!(Invariant, "density value {v} is negative or non-finite");
            }
            *v = v.max(0.0);
        }
        let mut s = Self { geometry, values, mass: 0.0 };
        s.mass = s.integrate(|_, r| r);
        Ok(s)
    }

    pub fn geometry(&self) -> &SpatialGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `∫ g(i, ρ_i)` with the geometry's cell measure.
    pub fn integrate<F: Fn(usize, f64) -> f64>(&self, g: F) -> f64 {
        match self.geometry {
            SpatialGeometry::Periodic { dim, axis } => {
                let dv = libm::pow(axis.spacing(), dim as f64);
                self.values.iter().enumerate().map(|(i, r)| g(i, *r)).sum::<f64>() * dv
            }
            SpatialGeometry::Radial { n, r_max } => {
                let dr = r_max / n as f64;
                self.values
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let (a, b) = (i as f64 * dr, (i + 1) as f64 * dr);
                        g(i, *r) * 4.0 * PI / 3.0 * (b * b * b - a * a * a)
                    })
                    .sum()
            }
        }
    }

    /// Grid maximum.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Grid maximum refined by a parabola through the peak and its two
    /// neighbours (one-dimensional profiles only; otherwise the grid maximum).
    pub fn sup_norm_refined(&self) -> f64 {
        let n = self.values.len();
        let one_d = matches!(self.geometry, SpatialGeometry::Periodic { dim: 1, .. } | SpatialGeometry::Radial { .. });
        if !one_d || n < 3 {
            return self.sup_norm();
        }
        let (i, &f0) = self.values.iter().enumerate().fold((0, &f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        let periodic = matches!(self.geometry, SpatialGeometry::Periodic { .. });
        let (fm, fp) = if periodic {
            (self.values[(i + n - 1) % n], self.values[(i + 1) % n])
        } else if i == 0 || i == n - 1 {
            return f0;
        } else {
            (self.values[i - 1], self.values[i + 1])
        };
        let curv = fp - 2.0 * f0 + fm;
        if curv < 0.0 {
            f0 - (fp - fm) * (fp - fm) / (8.0 * curv)
        } else {
            f0
        }
    }

    /// Cell positions of a one-dimensional periodic or radial density.
    pub fn positions(&self) -> Vec<f64> {
        match self.geometry {
            SpatialGeometry::Periodic { axis, .. } => axis.points().collect(),
            SpatialGeometry::Radial { n, r_max } => (0..n).map(|i| (i as f64 + 0.5) * r_max / n as f64).collect(),
        }
    }
}

/// Velocity moments `∫ |ξ|ⁿ f` (classical) or `h Tr(|p|ⁿ op)` (quantum) for
/// `n ∈ {0, 1, 2, 4}`.
pub trait Moments {
    fn moment(&self, n: u32) -> Result<f64>;
}

fn check_order(n: u32) -> Result<()> {
    if !matches!(n, 0 | 1 | 2 | 4) {
        bail!(Unsupported, "moment order {n} (supported: 0, 1, 2, 4)");
    }
    Ok(())
}

impl Moments for PhaseField {
    fn moment(&self, n: u32) -> Result<f64> {
        check_order(n)?;
        if n == 0 {
            return Ok(self.mass);
        }
        let d = self.grid.dim();
        let (mut x, mut v) = ([0.0; 3], [0.0; 3]);
        let mut s = 0.0;
        for (i, f) in self.values.iter().enumerate() {
            self.grid.coords(i, &mut x[..d], &mut v[..d]);
            let r2: f64 = v[..d].iter().map(|a| a * a).sum();
            s += f * libm::pow(r2, n as f64 / 2.0);
        }
        Ok(s * self.grid.cell_volume())
    }
}

impl Moments for MixedState {
    fn moment(&self, n: u32) -> Result<f64> {
        check_order(n)?;
        let h = self.planck();
        let probs = self.momentum_distribution()?;
        let mut s = 0.0;
        for (w, p) in self.weights.iter().zip(&probs) {
            let m: f64 = p
                .iter()
                .enumerate()
                .map(|(k, q)| q * libm::pow(libm::fabs(self.hbar * self.axis.wavenumber(k)), n as f64))
                .sum();
            s += h * w * m;
        }
        Ok(s)
    }
}
