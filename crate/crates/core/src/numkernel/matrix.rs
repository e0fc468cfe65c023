use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix of dimension at least two with finite entries.
///
/// Arithmetic between members keeps the invariant; fallible constructors
/// check it for external data.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<Complex64>);

impl DenseMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "not square: {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if inner.nrows() < 2 {
            return Err(Error::InvalidMatrix(format!(
                "dimension {} is below 2",
                inner.nrows()
            )));
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self(inner))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(n: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for n = {n}, found {}",
                n * n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let entries: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        Self::from_row_major(n, &entries)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn diagonal(values: &[Complex64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// Outer product `y x^H`.
    pub fn outer(y: &DVector<Complex64>, x: &DVector<Complex64>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                found: x.len(),
            });
        }
        Self::new(y * x.adjoint())
    }

    /// All-ones matrix.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(DMatrix::from_element(n, n, Complex64::new(1.0, 0.0)))
    }

    pub(crate) fn wrap(inner: DMatrix<Complex64>) -> Self {
        debug_assert!(inner.nrows() == inner.ncols());
        Self(inner)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn real_part(&self) -> Self {
        Self(self.0.map(|z| Complex64::new(z.re, 0.0)))
    }

    /// True when every imaginary part is at most `tol` in modulus.
    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// `self - z I`.
    pub fn shifted(&self, z: Complex64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= z;
        }
        Self(m)
    }

    /// Frobenius inner product `sum_ij self_ij conj(other_ij)`, linear in `self`.
    pub fn inner(&self, other: &DenseMatrix) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// `y^H M x`.
    pub fn bilinear(&self, y: &DVector<Complex64>, x: &DVector<Complex64>) -> Complex64 {
        y.dotc(&(&self.0 * x))
    }

    pub fn mul_vec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        &self.0 * x
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix{}", self.0)
    }
}

impl<'a> Add<&'a DenseMatrix> for &'a DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &'a DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a DenseMatrix> for &'a DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &'a DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a DenseMatrix> for &'a DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &'a DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 * &rhs.0)
    }
}
