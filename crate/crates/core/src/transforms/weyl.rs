use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::fft::{upsample, Fft};
use crate::state::{OperatorKernel, PhaseField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative spectral energy a field may carry in the top eighth of its
/// position band before quantization is refused.
const TAIL_LIMIT: f64 = 1e-6;

/// Fraction of the position-spectrum energy of `f` in the top eighth of the
/// resolved band.
pub fn x_spectral_tail(f: &PhaseField) -> Result<f64> {
    let g = f.grid();
    let (nx, nv) = (g.nx(), g.nv());
    let fft = Fft::new(nx)?;
    let cut = nx / 2 - nx / 16;
    let (mut tail, mut total) = (0.0, 0.0);
    let mut col = vec![ZERO; nx];
    for k in 0..nv {
        for i in 0..nx {
            col[i] = Complex64::new(f.at(i, k), 0.0);
        }
        fft.forward(&mut col);
        for (j, z) in col.iter().enumerate() {
            let e = z.norm_sqr();
            total += e;
            if crate::fft::wavenumber(j, nx).abs() as usize >= cut {
                tail += e;
            }
        }
    }
    Ok(if total > 0.0 { tail / total } else { 0.0 })
}

/// Integral kernel `op_f(x, y) = ∫ e^{-2iπ(y-x)ξ} f((x+y)/2, hξ) dξ`.
///
/// The midpoint `(x+y)/2` falls on the half grid, where `f` is evaluated by
/// trigonometric interpolation; grids whose fields carry spectral energy near
/// the position Nyquist band are refused.
pub fn weyl_quantize(f: &PhaseField, hbar: f64) -> Result<OperatorKernel> {
    let g = f.grid();
    g.check_hbar_matched(hbar)?;
    let tail = x_spectral_tail(f)?;
    if tail > TAIL_LIMIT {
        bail!(Aliasing, "spectral tail fraction {tail:.3e} exceeds {TAIL_LIMIT:.0e}; refine the position grid");
    }
    let (nx, nv) = (g.nx(), g.nv());
    let m = 2 * nx;
    let dx = g.x().spacing();
    // Half-grid samples: fine[s][k] = f(-X + s dx/2, v_k).
    let mut fine = vec![vec![0.0; nv]; m];
    let mut col = vec![ZERO; nx];
    for k in 0..nv {
        for i in 0..nx {
            col[i] = Complex64::new(f.at(i, k), 0.0);
        }
        for (s, z) in upsample(&col, 2)?.iter().enumerate() {
            fine[s][k] = z.re;
        }
    }
    let fft = Fft::new(m)?;
    let mut ks: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut buf = vec![ZERO; m];
    for row in &fine {
        buf.iter_mut().for_each(|z| *z = ZERO);
        for (k, v) in row.iter().enumerate() {
            let q = (k as isize - (nv / 2) as isize).rem_euclid(m as isize) as usize;
            buf[q] = Complex64::new(*v, 0.0);
        }
        fft.inverse(&mut buf);
        ks.push(buf.iter().map(|z| z / dx).collect());
    }
    let mut values = vec![ZERO; nx * nx];
    for a in 0..nx {
        for b in 0..nx {
            let s = a + b;
            let mm = (a as isize - b as isize).rem_euclid(m as isize) as usize;
            values[a * nx + b] = ks[s][mm];
        }
    }
    OperatorKernel::new(hbar, *g.x(), values)
}
