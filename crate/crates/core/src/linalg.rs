//! Small dense linear-algebra helpers shared by the estimators and stats.

use nalgebra::{DMatrix, Matrix6, SymmetricEigen};

/// Returns `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric positive-semidefinite square root `S` with `S·S = m`.
///
/// Eigenvalues slightly below zero (roundoff) are clamped to zero; anything
/// more negative than `-1e-9 · trace` is rejected and `None` is returned.
pub fn psd_sqrt(m: &Matrix6<f64>) -> Option<Matrix6<f64>> {
    let sym = symmetrize(m);
    if sym.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let eig = SymmetricEigen::new(sym);
    let scale = sym.trace().abs().max(f64::MIN_POSITIVE);
    if eig.eigenvalues.iter().any(|&l| l < -1e-9 * scale) {
        return None;
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Some(eig.eigenvectors * Matrix6::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &Matrix6<f64>) -> f64 {
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

/// PSD up to roundoff: min eigenvalue ≥ −1e-9·trace.
pub fn is_psd(m: &Matrix6<f64>) -> bool {
    min_eigenvalue(m) >= -1e-9 * m.trace().abs()
}

/// Ratio of largest to smallest absolute eigenvalue of a symmetric matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &l| a.min(l.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
