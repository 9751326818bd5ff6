//! Dense Hermitian helpers on top of nalgebra.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
/// Columns of the returned matrix are the matching eigenvectors.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let herm = hermitian_part(m);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn lambda_min(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(0.0)
}

/// Nearest positive semidefinite matrix in Frobenius norm, plus the smallest
/// eigenvalue of the input.
pub fn project_psd(m: &CMatrix) -> (CMatrix, f64) {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam > 0.0 {
            let v = vecs.column(k);
            out += (&v * v.adjoint()) * Complex64::new(lam, 0.0);
        }
    }
    (out, vals.first().copied().unwrap_or(0.0))
}

pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `Re Tr(a b)` for Hermitian `a`, `b`, without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

pub fn frobenius(m: &CMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}
