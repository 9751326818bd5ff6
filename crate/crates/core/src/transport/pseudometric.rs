use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{w2_fields, FieldDistance, SdpOutcome, W2Options};
use crate::error::{bail, Result};
use crate::grid::PhaseGrid;
use crate::state::{MixedState, PhaseField};
use crate::transforms::{
    gaussian_smooth, husimi_at, husimi_transform, phase_gradient_norm_sq, toeplitz_kernel, wigner_of_sqrt, wigner_transform,
};

/// Husimi function of `op` sampled on `grid`, normalized to unit mass:
/// spectral on ħ-matched grids, by coherent-state overlaps otherwise.
/// Returns the field and its mass before normalization.
pub fn husimi_on_grid(op: &MixedState, grid: &PhaseGrid) -> Result<(PhaseField, f64)> {
    if grid.dim() != 1 || grid.x() != op.axis() {
        bail!(Mismatch, "phase grid and state must share the one-dimensional position grid");
    }
    let nyquist = core::f64::consts::PI * op.hbar() / grid.x().spacing();
    if grid.v().extent() > nyquist * (1.0 + 1e-12) {
        bail!(
            Aliasing,
            "velocity extent {} exceeds the momentum band {nyquist} resolved by the position grid",
            grid.v().extent()
        );
    }
    let raw = if grid.check_hbar_matched(op.hbar()).is_ok() {
        husimi_transform(op, grid)?.field
    } else {
        let vals: Vec<f64> = (0..grid.nx())
            .flat_map(|i| {
                let x = grid.x().point(i);
                (0..grid.nv()).map(move |k| (x, grid.v().point(k)))
            })
            .map(|(x, p)| husimi_at(op, x, p).max(0.0))
            .collect();
        PhaseField::new(*grid, vals)?
    };
    let mass = raw.mass();
    if !(mass > 0.0) {
        bail!(InvalidInput, "Husimi function has no mass on this grid");
    }
    let vals = raw.values().iter().map(|v| v / mass).collect();
    Ok((PhaseField::new(*grid, vals)?, mass))
}

/// Certified lower bound `max(√(dħ), √((W₂(f, f̃_op)² − dħ)₊))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerEstimate {
    pub value: f64,
    pub w2: FieldDistance,
    /// `f` was signed and replaced by its Gaussian smoothing.
    pub smoothed_input: bool,
}

/// `max(√(dħ), √((w² − dħ)₊))` for a classical-to-Husimi distance `w`.
pub fn lower_from_w2(w: f64, dim: usize, hbar: f64) -> f64 {
    let dh = dim as f64 * hbar;
    libm::sqrt(dh).max(libm::sqrt((w * w - dh).max(0.0)))
}

pub fn wh_lower(f: &PhaseField, op: &MixedState, bin_cap: usize, opts: &W2Options) -> Result<LowerEstimate> {
    let (f, smoothed) = if f.is_nonnegative() {
        (f.clone(), false)
    } else {
        let s = gaussian_smooth(f, op.hbar())?;
        let vals: Vec<f64> = s.values().iter().map(|v| if *v < 0.0 && *v > -1e-12 { 0.0 } else { *v }).collect();
        let s = PhaseField::new(*f.grid(), vals)?;
        if !s.is_nonnegative() {
            bail!(InvalidInput, "signed input stays signed after smoothing (min {})", s.min_value());
        }
        (s, true)
    };
    let (hus, _) = husimi_on_grid(op, f.grid())?;
    let w = w2_fields(&f, &hus, bin_cap, opts)?;
    let value = lower_from_w2(w.lower, f.grid().dim(), op.hbar());
    Ok(LowerEstimate { value, w2: w, smoothed_input: smoothed })
}

/// Route taken by [`wh_upper_toeplitz`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum UpperMethod {
    /// A supplied symbol `g` with `op = op̃_g` (verified).
    Symbol,
    /// Symbol recovered by Gaussian deconvolution of the Wigner function
    /// (verified by re-quantization).
    Deconvolution,
    /// General operators: `W₂(f, f̃_op) + √(dħ + ħ²‖∇f_√op‖²)`.
    HusimiGradient,
}

/// Certified upper bound on `W_ħ(f, op)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperEstimate {
    pub value: f64,
    pub method: UpperMethod,
    /// Excess over the Toeplitz form `W₂ + √(dħ)` (zero for exact symbols).
    pub penalty: f64,
    pub w2: FieldDistance,
    /// `ħ²‖∇f_√op‖²` when computed.
    pub gradient_term: Option<f64>,
    /// Relative scaled Hilbert–Schmidt mismatch of the symbol check.
    pub symbol_mismatch: Option<f64>,
}

const SYMBOL_TOL: f64 = 1e-8;
const DECONV_TOL: f64 = 1e-6;

fn relative_mismatch(g: &PhaseField, op: &MixedState) -> Result<f64> {
    let k = toeplitz_kernel(g, op.hbar())?;
    let target = op.kernel();
    Ok(k.scaled_hs_distance(&target)? / target.scaled_hs_norm())
}

/// Upper bound through a Toeplitz representation of `op`: with a verified
/// symbol `g`, `W_ħ(f, op) ≤ W₂(f, g) + √(dħ)`; otherwise the general
/// gradient bound.
pub fn wh_upper_toeplitz(f: &PhaseField, op: &MixedState, symbol: Option<&PhaseField>, bin_cap: usize, opts: &W2Options) -> Result<UpperEstimate> {
    if !f.is_nonnegative() {
        bail!(InvalidInput, "classical argument must be nonnegative");
    }
    let grid = f.grid();
    let dh = grid.dim() as f64 * op.hbar();
    if let Some(g) = symbol {
        let mis = relative_mismatch(g, op)?;
        if mis > SYMBOL_TOL {
            bail!(InvalidInput, "supplied symbol does not quantize to the state (relative mismatch {mis:.3e})");
        }
        let w = w2_fields(f, g, bin_cap, opts)?;
        return Ok(UpperEstimate {
            value: w.upper + libm::sqrt(dh),
            method: UpperMethod::Symbol,
            penalty: 0.0,
            w2: w,
            gradient_term: None,
            symbol_mismatch: Some(mis),
        });
    }
    grid.check_hbar_matched(op.hbar())?;
    if let Some((g, mis)) = deconvolve(op, grid)? {
        let w = w2_fields(f, &g, bin_cap, opts)?;
        return Ok(UpperEstimate {
            value: w.upper + libm::sqrt(dh),
            method: UpperMethod::Deconvolution,
            penalty: 0.0,
            w2: w,
            gradient_term: None,
            symbol_mismatch: Some(mis),
        });
    }
    let (hus, _) = husimi_on_grid(op, grid)?;
    let w = w2_fields(f, &hus, bin_cap, opts)?;
    let sq = wigner_of_sqrt(op, grid)?;
    let grad = op.hbar() * op.hbar() * phase_gradient_norm_sq(&sq)?;
    let tail = libm::sqrt(dh + grad);
    Ok(UpperEstimate {
        value: w.upper + tail,
        method: UpperMethod::HusimiGradient,
        penalty: tail - libm::sqrt(dh),
        w2: w,
        gradient_term: Some(grad),
        symbol_mismatch: None,
    })
}

/// Regularized division of the Wigner spectrum by the Gaussian transfer
/// function `exp(−ħ|k|²/4)`; accepted only when the recovered symbol is
/// nonnegative (after clamping values above `-1e-10·max`) and re-quantizes
/// to `op` within `1e-6` relative.
fn deconvolve(op: &MixedState, grid: &PhaseGrid) -> Result<Option<(PhaseField, f64)>> {
    let w = wigner_transform(op, grid)?;
    let (nx, nv) = (grid.nx(), grid.nv());
    let mut buf: Vec<Complex64> = w.values().iter().map(|v| Complex64::new(*v, 0.0)).collect();
    crate::fft::fft2(&mut buf, nx, nv, false)?;
    let hbar = op.hbar();
    let alpha = 1e-12;
    for i in 0..nx {
        let kx = grid.x().wavenumber(i);
        for k in 0..nv {
            let kv = grid.v().wavenumber(k);
            let t = libm::exp(-hbar * (kx * kx + kv * kv) / 4.0);
            buf[i * nv + k] *= t / (t * t + alpha);
        }
    }
    crate::fft::fft2(&mut buf, nx, nv, true)?;
    let vals: Vec<f64> = buf.iter().map(|z| z.re).collect();
    let mx = vals.iter().copied().fold(0.0, f64::max);
    if vals.iter().any(|v| *v < -1e-10 * mx) {
        return Ok(None);
    }
    let vals: Vec<f64> = vals.into_iter().map(|v| v.max(0.0)).collect();
    let g = PhaseField::new(*grid, vals)?;
    let m = g.mass();
    if !(m > 0.0) {
        return Ok(None);
    }
    let g = PhaseField::new(*grid, g.values().iter().map(|v| v / m).collect())?;
    let mis = relative_mismatch(&g, op)?;
    Ok(if mis <= DECONV_TOL { Some((g, mis)) } else { None })
}

/// Combined `W_ħ` report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WhEstimate {
    pub hbar: f64,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
    pub gap: Option<f64>,
    pub method: String,
}

impl WhEstimate {
    pub fn new(hbar: f64, dim: usize, lower: &LowerEstimate, upper: &UpperEstimate, exact: Option<&SdpOutcome>) -> Self {
        let tag = match upper.method {
            UpperMethod::Symbol => "toeplitz-symbol",
            UpperMethod::Deconvolution => "toeplitz-deconvolution",
            UpperMethod::HusimiGradient => "husimi-gradient",
        };
        let mut method = String::from("husimi-lower+");
        method.push_str(tag);
        if exact.is_some() {
            method.push_str("+sdp");
        }
        Self {
            hbar,
            dim,
            lower: lower.value,
            upper: upper.value,
            exact: exact.map(|e| e.value()),
            gap: exact.map(|e| e.gap),
            method,
        }
    }

    /// Sandwich `lower ≤ exact ≤ upper` and floor `lower² ≥ dħ`, to `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let floor = libm::sqrt(self.dim as f64 * self.hbar);
        if self.lower < floor - tol {
            bail!(Invariant, "lower bound {} below the floor {floor}", self.lower);
        }
        if let Some(e) = self.exact {
            if self.lower > e + tol || e > self.upper + tol {
                bail!(Invariant, "sandwich violated: {} <= {e} <= {}", self.lower, self.upper);
            }
        } else if self.lower > self.upper + tol {
            bail!(Invariant, "lower {} exceeds upper {}", self.lower, self.upper);
        }
        Ok(())
    }
}
