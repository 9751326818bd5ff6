//! Radix-2 complex FFT.
//!
//! Forward transform uses `exp(-2πi jk/n)` and is unnormalized; the inverse
//! carries the `1/n` factor so that `inverse(forward(x)) = x`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{bail, Result};

/// Precomputed twiddles and bit-reversal table for one transform length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    rev: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            bail!(InvalidInput, "FFT length {n} is not a power of two");
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(a), libm::sin(a))
            })
            .collect();
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self { n, twiddles, rev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n, "FFT buffer length mismatch");
        for i in 0..n {
            let j = self.rev[i];
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
        let s = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }
}

/// Integer wavenumber of FFT bin `k` for length `n` (bins `n/2..` are negative).
#[inline]
pub fn wavenumber(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// 2D transform of a row-major `rows × cols` array.
pub fn fft2(data: &mut [Complex64], rows: usize, cols: usize, inverse: bool) -> Result<()> {
    let fr = Fft::new(cols)?;
    let fc = Fft::new(rows)?;
    for row in data.chunks_mut(cols) {
        if inverse {
            fr.inverse(row)
        } else {
            fr.forward(row)
        }
    }
    let mut col = alloc::vec![Complex64::new(0.0, 0.0); rows];
    for j in 0..cols {
        for i in 0..rows {
            col[i] = data[i * cols + j];
        }
        if inverse {
            fc.inverse(&mut col)
        } else {
            fc.forward(&mut col)
        }
        for i in 0..rows {
            data[i * cols + j] = col[i];
        }
    }
    Ok(())
}

/// Trigonometric interpolation of a periodic sequence of length `n` onto
/// `factor·n` equispaced points (the original samples sit at multiples of
/// `factor`). The Nyquist bin is split evenly so real input stays real.
pub fn upsample(input: &[Complex64], factor: usize) -> Result<Vec<Complex64>> {
    let n = input.len();
    let m = n * factor;
    let f = Fft::new(n)?;
    let g = Fft::new(m)?;
    let mut spec = input.to_vec();
    f.forward(&mut spec);
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); m];
    if n == 1 {
        out.iter_mut().for_each(|z| *z = spec[0]);
        return Ok(out);
    }
    for k in 0..n / 2 {
        out[k] = spec[k];
    }
    for k in n / 2 + 1..n {
        out[m - (n - k)] = spec[k];
    }
    if factor > 1 {
        out[n / 2] = spec[n / 2] * 0.5;
        out[m - n / 2] = spec[n / 2] * 0.5;
    } else {
        out[n / 2] = spec[n / 2];
    }
    g.inverse(&mut out);
    let s = factor as f64;
    for z in out.iter_mut() {
        *z *= s;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let a = -2.0 * PI * (j * k) as f64 / n as f64;
                        x[j] * Complex64::new(a.cos(), a.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft() {
        for &n in &[1usize, 2, 4, 8, 32, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            Fft::new(n).unwrap().forward(&mut y);
            for (a, b) in y.iter().zip(naive(&x)) {
                assert!((a - b).norm() < 1e-11 * n as f64);
            }
            Fft::new(n).unwrap().inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-13 * n as f64);
            }
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Fft::new(12).is_err());
    }

    #[test]
    fn upsample_recovers_band_limited_signal() {
        let n = 16;
        let f = |t: f64| (2.0 * PI * 3.0 * t).sin() + 0.5 * (2.0 * PI * 5.0 * t).cos();
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new(f(j as f64 / n as f64), 0.0)).collect();
        let y = upsample(&x, 2).unwrap();
        for (s, z) in y.iter().enumerate() {
            assert!((z.re - f(s as f64 / (2 * n) as f64)).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
    }
}
