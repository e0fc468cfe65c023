//! Dense eigenvalue, eigenvector and singular-value kernels.

mod eigen;
mod matrix;
mod reference;
mod singular;

pub use eigen::{
    apply_j, eig_pairs, hamiltonian_phase_normalize, spectrum, Eigensystem, GAP_TOL_REL, TOL_EIG,
};

pub use matrix::DenseMatrix;
pub use num_complex::Complex64;
pub use reference::{tridiag_toeplitz, tridiag_toeplitz_reference};
pub use singular::{numerical_rank, sigma_min, singular_values, spectral_norm};
