use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest eigenvalue that still counts as positive.
pub const PD_THRESHOLD: f64 = 1e-8;

const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdCheck {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub positive_definite: bool,
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenvalue bounds of the symmetric part of `matrix`.
pub fn pd_check(matrix: &DMatrix<f64>) -> Result<PdCheck> {
    if !matrix.is_square() || matrix.is_empty() {
        return Err(Error::invalid("pd_check needs a non-empty square matrix"));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let a = symmetrize(matrix);
    let eig = SymmetricEigen::new(a.clone());
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let residual = (&a * v - v * lambda).norm();
        if residual > RESIDUAL_TOL * scale {
            return Err(Error::EigenResidual(residual / scale));
        }
    }
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    Ok(PdCheck {
        min_eigenvalue: min,
        max_eigenvalue: max,
        positive_definite: min > PD_THRESHOLD,
    })
}
