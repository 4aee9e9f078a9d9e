//! Dense complex linear algebra helpers over nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::{C64, LabError, Result};

/// Largest entrywise modulus of M - M^dagger.
pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise modulus.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and unitary
/// eigenvector columns. Only the lower triangle is read.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (DVector<f64>, DMatrix<C64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    (eig.eigenvalues, eig.eigenvectors)
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() != m.ncols() {
        return Err(LabError::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        LabError::Convergence {
            iterations: 10_000,
            detail: "Schur iteration".into(),
            trace: Vec::new(),
        }
    })?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenvector for an (approximate) eigenvalue by inverse iteration.
/// The result has unit Euclidean norm.
pub fn inverse_iteration(m: &DMatrix<C64>, mu: C64) -> Result<DVector<C64>> {
    let n = m.nrows();
    let scale = max_abs(m).max(1.0);
    let shift = mu + C64::new(scale * 1e-13, scale * 1e-13);
    let shifted = m - DMatrix::<C64>::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut x = DVector::from_fn(n, |i, _| C64::new(1.0 + 0.1 * (i as f64).sin(), 0.3 * (i as f64).cos()));
    for _ in 0..6 {
        x = lu
            .solve(&x)
            .ok_or_else(|| LabError::Domain("singular shift in inverse iteration".into()))?;
        let nrm = x.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(LabError::Domain("inverse iteration broke down".into()));
        }
        x /= C64::new(nrm, 0.0);
    }
    Ok(x)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().fold(0.0f64, |a, &s| a.max(s))
}

/// Kronecker product A (x) B.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Determinant of a small square block.
pub fn det(m: &DMatrix<C64>) -> C64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    m.clone().lu().determinant()
}

/// Rows `idx` of `m`.
pub fn select_rows(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

/// Principal submatrix on `idx`.
pub fn principal_submatrix(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Euclidean inner product <x, y>, antilinear in x.
pub fn dot(x: &DVector<C64>, y: &DVector<C64>) -> C64 {
    x.dotc(y)
}
