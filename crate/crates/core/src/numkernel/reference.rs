use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::eigen::Eigensystem;
use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Tridiagonal Toeplitz matrix with constant sub-, main and superdiagonal.
pub fn tridiag_toeplitz(
    n: usize,
    sub: Complex64,
    diag: Complex64,
    sup: Complex64,
) -> Result<DenseMatrix> {
    DenseMatrix::from_fn(n, |i, j| {
        if i == j {
            diag
        } else if j == i + 1 {
            sup
        } else if i == j + 1 {
            sub
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Closed-form eigen-triples of a tridiagonal Toeplitz matrix.
///
/// With `s = sqrt(sub * sup)` the eigenvalues are `diag + 2 s cos(k pi / (n + 1))`
/// and the right eigenvectors have entries `(s / sup)^j sin(j k pi / (n + 1))`.
/// Left eigenvectors come from the same formula applied to the adjoint.
/// Intended as an independent check on [`super::eig_pairs`].
pub fn tridiag_toeplitz_reference(
    n: usize,
    sub: Complex64,
    diag: Complex64,
    sup: Complex64,
) -> Result<Eigensystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} is below 2")));
    }
    if sub.norm() == 0.0 || sup.norm() == 0.0 {
        return Err(Error::ZeroOffdiagonal);
    }
    let s = (sub * sup).sqrt();
    let ratio = s / sup;
    // Adjoint has sub' = conj(sup), sup' = conj(sub) and s' = conj(s).
    let ratio_left = s.conj() / sub.conj();
    let h = PI / (n as f64 + 1.0);
    let triples = (1..=n)
        .map(|k| {
            let theta = k as f64 * h;
            let lambda = diag + s * (2.0 * theta.cos());
            let x = DVector::from_fn(n, |j, _| ratio.powu(j as u32 + 1) * ((j + 1) as f64 * theta).sin());
            let y = DVector::from_fn(n, |j, _| {
                ratio_left.powu(j as u32 + 1) * ((j + 1) as f64 * theta).sin()
            });
            (lambda, x, y)
        })
        .collect();
    Ok(Eigensystem::assemble(triples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::eig_pairs;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric_cosine_spectrum() {
        let sys = tridiag_toeplitz_reference(4, c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let mut expected: Vec<f64> = (1..=4).map(|k| 2.0 * (k as f64 * PI / 5.0).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (l, e) in sys.eigenvalues().iter().zip(expected) {
            assert!((l - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn shifted_spectrum() {
        let sys = tridiag_toeplitz_reference(3, c(1.0, 0.0), c(5.0, 0.0), c(1.0, 0.0)).unwrap();
        let mut expected: Vec<f64> =
            (1..=3).map(|k| 5.0 + 2.0 * (k as f64 * PI / 4.0).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (l, e) in sys.eigenvalues().iter().zip(expected) {
            assert!((l - c(e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn positive_offdiagonals_give_real_spectrum_symmetric_about_diag() {
        let sys = tridiag_toeplitz_reference(6, c(3.0, 0.0), c(0.25, 0.0), c(0.5, 0.0)).unwrap();
        let vals = sys.eigenvalues();
        for i in 0..6 {
            assert_eq!(vals[i].im, 0.0);
            let mirror = c(0.5, 0.0) - vals[5 - i];
            assert!((vals[i] - mirror).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_offdiagonal_rejected() {
        assert_eq!(
            tridiag_toeplitz_reference(3, c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap_err(),
            Error::ZeroOffdiagonal
        );
    }

    #[test]
    fn residuals_of_closed_form_triples() {
        let (sub, diag, sup) = (c(2.0, 1.0), c(0.3, -0.2), c(0.5, 0.25));
        let a = tridiag_toeplitz(7, sub, diag, sup).unwrap();
        let sys = tridiag_toeplitz_reference(7, sub, diag, sup).unwrap();
        let adj = a.adjoint();
        for i in 0..7 {
            let l = sys.eigenvalue(i);
            let rx = (a.mul_vec(sys.right(i)) - sys.right(i) * l).norm();
            let ry = (adj.mul_vec(sys.left(i)) - sys.left(i) * l.conj()).norm();
            assert!(rx < 1e-12 && ry < 1e-12, "{rx} {ry}");
        }
    }

    #[test]
    fn eig_pairs_agrees_with_closed_form() {
        for n in 2..=12 {
            for &(sub, diag, sup) in &[
                (c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
                (c(2.0, 0.0), c(0.5, 0.0), c(0.7, 0.0)),
                (c(1.0, 0.5), c(-0.2, 0.3), c(0.8, -0.1)),
            ] {
                let a = tridiag_toeplitz(n, sub, diag, sup).unwrap();
                let got = eig_pairs(&a).unwrap();
                let want = tridiag_toeplitz_reference(n, sub, diag, sup).unwrap();
                for i in 0..n {
                    assert!((got.eigenvalue(i) - want.eigenvalue(i)).norm() < 1e-8);
                    let rel = (got.overlap(i).re - want.overlap(i).re).abs() / want.overlap(i).re;
                    assert!(rel < 1e-8, "n={n} i={i} rel={rel}");
                }
            }
        }
    }
}
