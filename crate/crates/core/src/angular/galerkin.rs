//! Fourier–Galerkin discretization of L = (−i∂_θ + A(θ))² + a(θ) on S¹.

use faer::{Mat, Side};
use num_complex::Complex64;

use super::field::TrigPoly;
use crate::error::{Error, Result};

/// Dense Hermitian matrix of L in the basis e^{ikθ}/√(2π), |k| ≤ m.
///
/// ⟨e_j, L e_k⟩ = k² δ_jk + (j + k) Â_{j−k} + (A²)^_{j−k} + â_{j−k}.
pub fn operator_matrix(electric: &TrigPoly, magnetic: &TrigPoly, m: usize) -> Mat<Complex64> {
    let n = 2 * m + 1;
    let a2 = magnetic.product(magnetic);
    let mi = m as i64;
    Mat::from_fn(n, n, |r, c| {
        let j = r as i64 - mi;
        let k = c as i64 - mi;
        let d = j - k;
        let mut v = electric.coeff(d) + a2.coeff(d) + magnetic.coeff(d) * (j + k) as f64;
        if j == k {
            v += Complex64::new((k * k) as f64, 0.0);
        }
        v
    })
}

/// −Δ_S in the same basis.
pub fn laplacian_matrix(m: usize) -> Mat<Complex64> {
    let n = 2 * m + 1;
    let mi = m as i64;
    Mat::from_fn(n, n, |r, c| {
        if r == c {
            let k = r as i64 - mi;
            Complex64::new((k * k) as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Eigenvalues (ascending) and matching eigenvector columns.
pub fn hermitian_eigen(matrix: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let eig = matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Domain(format!("Hermitian eigensolver failed: {e:?}")))?;
    let values = eig.S().column_vector().iter().map(|c| c.re).collect();
    Ok((values, eig.U().to_owned()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(matrix: &Mat<Complex64>) -> Result<f64> {
    let values = matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Domain(format!("Hermitian eigensolver failed: {e:?}")))?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}
