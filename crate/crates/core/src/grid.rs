//! Periodic phase-space grids.

use core::f64::consts::PI;

use crate::error::{bail, Result};

/// One periodic axis `[-extent, extent)` sampled at `n` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Axis {
    n: usize,
    extent: f64,
}

impl Axis {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            bail!(InvalidInput, "axis size {n} must be a power of two >= 4");
        }
        if !(extent.is_finite() && extent > 0.0) {
            bail!(InvalidInput, "axis half-width {extent} must be positive and finite");
        }
        Ok(Self { n, extent })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Minimal-image representative of an offset, in `[-extent, extent)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let l = 2.0 * self.extent;
        let mut r = d - l * libm::floor((d + self.extent) / l);
        if r >= self.extent {
            r -= l;
        }
        r
    }

    /// Angular wavenumber of FFT bin `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        PI / self.extent * crate::fft::wavenumber(k, self.n)
    }

    /// Nearest grid index of a position, periodically wrapped.
    pub fn nearest(&self, x: f64) -> usize {
        let t = (self.wrap(x) + self.extent) / self.spacing();
        (libm::round(t) as i64).rem_euclid(self.n as i64) as usize
    }
}

/// Product grid of `d` identical position axes and `d` identical velocity axes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseGrid {
    dim: usize,
    x: Axis,
    v: Axis,
}

impl PhaseGrid {
    pub fn new(dim: usize, x: Axis, v: Axis) -> Result<Self> {
        if dim != 1 && dim != 3 {
            bail!(Unsupported, "dimension {dim} (only 1 and 3 are implemented)");
        }
        Ok(Self { dim, x, v })
    }

    pub fn new_1d(nx: usize, x_extent: f64, nv: usize, v_extent: f64) -> Result<Self> {
        Self::new(1, Axis::new(nx, x_extent)?, Axis::new(nv, v_extent)?)
    }

    /// One-dimensional grid whose velocity spacing is `πħ/(2X)`, the native
    /// frequency spacing of the Wigner transform on this position axis. The
    /// velocity band then spans `nv` native bins; `nv <= nx` keeps it within
    /// the band resolved by the position grid (`nx >= 4XV/(πħ)`).
    pub fn semiclassical(nx: usize, x_extent: f64, nv: usize, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            bail!(InvalidInput, "hbar {hbar} must be positive");
        }
        let dv = PI * hbar / (2.0 * x_extent);
        let g = Self::new_1d(nx, x_extent, nv, 0.5 * nv as f64 * dv)?;
        g.check_hbar_matched(hbar)?;
        Ok(g)
    }

    /// Refuses grids on which the quantization maps would alias at this `hbar`.
    pub fn check_hbar_matched(&self, hbar: f64) -> Result<()> {
        if self.dim != 1 {
            bail!(Unsupported, "quantization maps are implemented in one dimension");
        }
        let native = PI * hbar / (2.0 * self.x.extent);
        if libm::fabs(self.v.spacing() / native - 1.0) > 1e-9 {
            bail!(
                Aliasing,
                "velocity spacing {} does not match pi*hbar/(2X) = {native}",
                self.v.spacing()
            );
        }
        let need = 4.0 * self.x.extent * self.v.extent / (PI * hbar);
        if (self.x.n as f64) < need * (1.0 - 1e-12) {
            bail!(Aliasing, "nx = {} below 4XV/(pi hbar) = {need}", self.x.n);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self) -> &Axis {
        &self.x
    }

    pub fn v(&self) -> &Axis {
        &self.v
    }

    pub fn nx(&self) -> usize {
        self.x.n
    }

    pub fn nv(&self) -> usize {
        self.v.n
    }

    /// Number of position cells (`nx^d`).
    pub fn position_cells(&self) -> usize {
        self.x.n.pow(self.dim as u32)
    }

    /// Number of velocity cells (`nv^d`).
    pub fn velocity_cells(&self) -> usize {
        self.v.n.pow(self.dim as u32)
    }

    pub fn cells(&self) -> usize {
        self.position_cells() * self.velocity_cells()
    }

    pub fn position_cell_volume(&self) -> f64 {
        libm::pow(self.x.spacing(), self.dim as f64)
    }

    pub fn velocity_cell_volume(&self) -> f64 {
        libm::pow(self.v.spacing(), self.dim as f64)
    }

    pub fn cell_volume(&self) -> f64 {
        self.position_cell_volume() * self.velocity_cell_volume()
    }

    /// Writes the coordinates of flat cell index `idx` into `x` and `v`.
    pub fn coords(&self, idx: usize, x: &mut [f64], v: &mut [f64]) {
        let nvc = self.velocity_cells();
        let (mut xi, mut vi) = (idx / nvc, idx % nvc);
        for k in (0..self.dim).rev() {
            x[k] = self.x.point(xi % self.x.n);
            v[k] = self.v.point(vi % self.v.n);
            xi /= self.x.n;
            vi /= self.v.n;
        }
    }
}
