//! Periodic cubic B-spline interpolation for semi-Lagrangian shifts.

use alloc::vec;
use alloc::vec::Vec;

/// B-spline coefficients `c` with `(c[i-1] + 4c[i] + c[i+1])/6 = f[i]`
/// (cyclic), by the Sherman–Morrison cyclic tridiagonal solve.
fn coefficients(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let (a, b, c) = (1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0);
    let (alpha, beta) = (c, a);
    let gamma = -b;
    let mut diag = vec![b; n];
    diag[0] = b - gamma;
    diag[n - 1] = b - alpha * beta / gamma;
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let mut cp = vec![0.0; n];
        let mut x = vec![0.0; n];
        cp[0] = c / diag[0];
        x[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - a * cp[i - 1];
            cp[i] = c / m;
            x[i] = (rhs[i] - a * x[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            x[i] -= cp[i] * x[i + 1];
        }
        x
    };
    let y = solve(f);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve(&u);
    let fact = (y[0] + beta * y[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    y.iter().zip(&z).map(|(yi, zi)| yi - fact * zi).collect()
}

/// Periodic line sampled at unit spacing, evaluated at `i - shift` for every
/// `i` (a translation by `shift` cells).
pub fn shift_periodic(f: &[f64], shift: f64, out: &mut [f64]) {
    let n = f.len();
    assert_eq!(out.len(), n);
    let c = coefficients(f);
    let p = -shift;
    let j = libm::floor(p);
    let t = p - j;
    let w = [
        (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0,
        (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0,
        (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0,
        t * t * t / 6.0,
    ];
    let j = (j as i64).rem_euclid(n as i64) as usize;
    for (i, o) in out.iter_mut().enumerate() {
        let base = i + j + n - 1;
        *o = w[0] * c[base % n] + w[1] * c[(base + 1) % n] + w[2] * c[(base + 2) % n] + w[3] * c[(base + 3) % n];
    }
}
