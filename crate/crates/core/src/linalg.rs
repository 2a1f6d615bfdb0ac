//! Small dense complex linear-algebra helpers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Build a complex matrix from row-major `(re, im)` pairs.
pub fn cmatrix(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&(re, im)| c64(re, im)))
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Max element of `m - m^dagger`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Multiply column `k` by a unit phase so its largest-magnitude component is
/// real and positive. Ties are broken by the lowest index.
pub fn fix_column_phase(v: &mut CMatrix, k: usize) {
    let mags: Vec<f64> = v.column(k).iter().map(|z| z.norm()).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = mags
        .iter()
        .position(|&m| m >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let z = v[(pivot, k)];
    let phase = z.conj() / z.norm();
    v.column_mut(k).iter_mut().for_each(|x| *x *= phase);
    v[(pivot, k)] = c64(z.norm(), 0.0);
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
/// eigenvector phases fixed by [`fix_column_phase`].
pub fn hermitian_eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not square",
            n,
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite input".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigensolverFailure("no convergence".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        fix_column_phase(&mut vectors, dst);
    }
    Ok((values, vectors))
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues descending.
pub fn symmetric_eigh(m: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::EigensolverFailure("no convergence".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = RMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Sum of singular values.
pub fn schatten1(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| c64(x, 0.0))
}
