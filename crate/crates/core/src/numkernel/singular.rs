use nalgebra::SVD;
use num_complex::Complex64;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

const SVD_ITER_PER_DIM: usize = 500;

/// Smallest singular value of `A - z I`.
pub fn sigma_min(a: &DenseMatrix, z: Complex64) -> Result<f64> {
    let shifted = a.shifted(z).into_matrix();
    let n = shifted.nrows();
    let svd = SVD::try_new_unordered(shifted, false, false, f64::EPSILON, SVD_ITER_PER_DIM * n)
        .ok_or(Error::NonConvergence("SVD"))?;
    Ok(svd.singular_values.min().max(0.0))
}

/// All singular values in descending order.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let m = a.as_matrix().clone();
    let n = m.nrows();
    let svd = SVD::try_new(m, false, false, f64::EPSILON, SVD_ITER_PER_DIM * n)
        .ok_or(Error::NonConvergence("SVD"))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Spectral norm `||A||_2`.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?[0])
}

/// Numerical rank: singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(a: &DenseMatrix, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let cut = rel_tol * s[0];
    Ok(s.iter().filter(|&&v| v > cut).count())
}
