//! Mean-field dynamics: semi-Lagrangian Vlasov and split-step Hartree flows
//! sharing one interaction kernel, and the paired evolution that records the
//! density bound trajectory `C∞(t)`.

mod evolve;
mod hartree;
mod spline;
mod vlasov;

pub use evolve::{evolve_pair, Checkpoint, EvolutionLog, EvolveOptions, PairRun, RunStatus};
pub use hartree::{hartree_energy, hartree_step, HartreeReport};
pub use spline::shift_periodic;
pub use vlasov::{vlasov_energy, vlasov_step, VlasovReport};

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::fft::{wavenumber, Fft};
use crate::state::{SpatialDensity, SpatialGeometry};

/// Shape of the pair interaction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum KernelKind {
    /// `1/(4π|x|)` in three dimensions on radially symmetric densities.
    Coulomb3dRadial,
    /// `1/(4π√(x² + ε²))` on a one-dimensional periodic box (minimal image).
    MollifiedCoulomb { epsilon: f64 },
    /// Periodic Poisson kernel in one dimension: `-V'' = ρ - ⟨ρ⟩`.
    PeriodicPoisson1d,
    /// Kernel values at the offsets `j·dx` (`j < nx/2`) and `(j - nx)·dx`
    /// (`j >= nx/2`), i.e. in FFT order.
    CustomTable { values: Vec<f64> },
}

/// Interaction `K = κ·shape`; `κ > 0` is repulsive, `κ < 0` attractive.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InteractionKernel {
    pub kind: KernelKind,
    pub kappa: f64,
}

impl InteractionKernel {
    pub fn new(kind: KernelKind, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            bail!(InvalidInput, "coupling must be finite");
        }
        match &kind {
            KernelKind::MollifiedCoulomb { epsilon } if !(epsilon.is_finite() && *epsilon > 0.0) => {
                bail!(InvalidInput, "mollification width {epsilon} must be positive")
            }
            KernelKind::CustomTable { values } if values.iter().any(|v| !v.is_finite()) => {
                bail!(InvalidInput, "kernel table has non-finite entries")
            }
            _ => {}
        }
        Ok(Self { kind, kappa })
    }

    /// Whether the kernel treats the box as a genuinely periodic domain
    /// (rather than a truncation of the line).
    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, KernelKind::PeriodicPoisson1d | KernelKind::CustomTable { .. })
    }
}

/// Potential `V = K * ρ` and force `E = -∇V` on the density's grid. On radial
/// grids the force is the outward radial component.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    pub potential: Vec<f64>,
    pub force: Vec<f64>,
}

pub fn mean_field(rho: &SpatialDensity, kernel: &InteractionKernel) -> Result<MeanField> {
    match (*rho.geometry(), &kernel.kind) {
        (SpatialGeometry::Radial { n, r_max }, KernelKind::Coulomb3dRadial) => Ok(radial_field(rho.values(), n, r_max, kernel.kappa)),
        (SpatialGeometry::Periodic { dim: 1, axis }, kind) if !matches!(kind, KernelKind::Coulomb3dRadial) => {
            let n = axis.len();
            let dx = axis.spacing();
            let fft = Fft::new(n)?;
            let mut r: Vec<Complex64> = rho.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
            fft.forward(&mut r);
            let kmul: Vec<Complex64> = match kind {
                KernelKind::PeriodicPoisson1d => (0..n)
                    .map(|j| {
                        let k = axis.wavenumber(j);
                        if j == 0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(kernel.kappa / (k * k), 0.0)
                        }
                    })
                    .collect(),
                _ => {
                    let table: Vec<f64> = match kind {
                        KernelKind::MollifiedCoulomb { epsilon } => (0..n)
                            .map(|j| {
                                let d = wavenumber(j, n) * dx;
                                1.0 / (4.0 * PI * libm::sqrt(d * d + epsilon * epsilon))
                            })
                            .collect(),
                        KernelKind::CustomTable { values } => {
                            if values.len() != n {
                                bail!(Mismatch, "kernel table has {} entries on a grid of {n}", values.len());
                            }
                            values.clone()
                        }
                        _ => unreachable!(),
                    };
                    let mut t: Vec<Complex64> = table.iter().map(|v| Complex64::new(kernel.kappa * v * dx, 0.0)).collect();
                    fft.forward(&mut t);
                    t
                }
            };
            let mut v: Vec<Complex64> = r.iter().zip(&kmul).map(|(a, b)| a * b).collect();
            let mut e: Vec<Complex64> = v
                .iter()
                .enumerate()
                .map(|(j, z)| {
                    if 2 * j == n {
                        Complex64::new(0.0, 0.0)
                    } else {
                        -Complex64::new(0.0, axis.wavenumber(j)) * z
                    }
                })
                .collect();
            fft.inverse(&mut v);
            fft.inverse(&mut e);
            Ok(MeanField { potential: v.iter().map(|z| z.re).collect(), force: e.iter().map(|z| z.re).collect() })
        }
        (SpatialGeometry::Periodic { dim, .. }, _) if dim != 1 => bail!(Unsupported, "periodic mean field in dimension {dim}"),
        (g, k) => bail!(Mismatch, "kernel {k:?} cannot act on geometry {g:?}"),
    }
}

/// Shell-theorem field of a piecewise-constant radial density.
fn radial_field(values: &[f64], n: usize, r_max: f64, kappa: f64) -> MeanField {
    let dr = r_max / n as f64;
    let shell = |a: f64, b: f64| 4.0 * PI / 3.0 * (b * b * b - a * a * a);
    let mut enclosed = 0.0;
    let mut force = vec![0.0; n];
    let mut inner = vec![0.0; n];
    for i in 0..n {
        let (a, c) = (i as f64 * dr, (i as f64 + 0.5) * dr);
        let m = enclosed + values[i] * shell(a, c);
        inner[i] = m;
        force[i] = kappa * m / (4.0 * PI * c * c);
        enclosed += values[i] * shell(a, a + dr);
    }
    // V(r) = κ/(4π) [M(r)/r + ∫_r^∞ 4π s ρ(s) ds].
    let mut outer = 0.0;
    let mut potential = vec![0.0; n];
    for i in (0..n).rev() {
        let (c, b) = ((i as f64 + 0.5) * dr, (i + 1) as f64 * dr);
        let part = values[i] * 2.0 * PI * (b * b - c * c);
        potential[i] = kappa / (4.0 * PI) * (inner[i] / c + outer + part);
        outer += values[i] * 2.0 * PI * (b * b - (b - dr) * (b - dr));
    }
    MeanField { potential, force }
}
