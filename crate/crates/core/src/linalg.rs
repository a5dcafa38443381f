//! Small dense helpers on top of `nalgebra` for complex Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
///
/// Only the lower triangle is read; the matrix is symmetrized first so that
/// tiny rounding asymmetries do not leak into the result.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `(m + m^*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Spectral norm of a Hermitian matrix (largest eigenvalue modulus).
pub fn hermitian_spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let (values, _) = hermitian_eigen(m);
    values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of a general matrix (largest singular value).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(*v))
}

/// 2-norm condition number of a Hermitian matrix; infinite when singular.
pub fn hermitian_condition(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    let max = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = values.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `a x = rhs` for Hermitian positive definite `a` by Cholesky.
pub fn cholesky_solve(a: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    let chol = hermitian_part(a)
        .cholesky()
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    Ok(chol.solve(rhs))
}

/// Solves `a x = rhs` for a general square matrix by LU with partial pivoting.
pub fn lu_solve(a: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    a.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Singular("LU factorization hit a zero pivot".into()))
}

/// Determinant via LU.
pub fn determinant(a: &CMatrix) -> Complex64 {
    a.clone().lu().determinant()
}

/// Row vector `v` as a 1 x n matrix.
pub fn row(v: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(1, v.len(), v)
}

/// Column vector `v` as an n x 1 matrix.
pub fn column(v: &[Complex64]) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v)
}

/// `sum_j a_j conj(b_j)`.
pub fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Euclidean norm of a complex slice.
pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
