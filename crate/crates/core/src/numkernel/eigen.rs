use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Relative residual bound every computed eigen-triple must satisfy.
pub const TOL_EIG: f64 = 1e-10;

/// Eigenvalues closer than this multiple of `||A||_F` are rejected as non-simple.
pub const GAP_TOL_REL: f64 = 1e-8;

const SCHUR_ITER_PER_DIM: usize = 200;

/// `Im(y^H J x)` below this fraction of `|y^H J x|` counts as real.
const PHASE_TOL: f64 = 1e-14;

/// Matched eigen-triples `(lambda_i, x_i, y_i)` of a matrix with simple spectrum.
///
/// Eigenvalues are sorted lexicographically by `(re, im)`. Right and left
/// eigenvectors have unit norm and `y_i` is rotated so that `y_i^H x_i` is
/// real and positive (unless the system was rephased for Hamiltonian work).
#[derive(Clone, Debug)]
pub struct Eigensystem {
    eigenvalues: Vec<Complex64>,
    rights: Vec<DVector<Complex64>>,
    lefts: Vec<DVector<Complex64>>,
    overlaps: Vec<Complex64>,
    min_gap: f64,
}

impl Eigensystem {
    /// Assembles a system from unnormalized triples, sorting and phase-fixing.
    pub(crate) fn assemble(
        mut triples: Vec<(Complex64, DVector<Complex64>, DVector<Complex64>)>,
    ) -> Self {
        triples.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let mut eigenvalues = Vec::with_capacity(triples.len());
        let mut rights = Vec::with_capacity(triples.len());
        let mut lefts = Vec::with_capacity(triples.len());
        let mut overlaps = Vec::with_capacity(triples.len());
        for (lambda, x, y) in triples {
            let x = unit(x);
            let mut y = unit(y);
            let s = y.dotc(&x);
            if s.norm() > 0.0 {
                y *= s / s.norm();
            }
            eigenvalues.push(lambda);
            rights.push(x);
            lefts.push(y);
            overlaps.push(Complex64::new(s.norm(), 0.0));
        }
        let min_gap = min_pairwise_gap(&eigenvalues);
        Self {
            eigenvalues,
            rights,
            lefts,
            overlaps,
            min_gap,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> Complex64 {
        self.eigenvalues[i]
    }

    pub fn right(&self, i: usize) -> &DVector<Complex64> {
        &self.rights[i]
    }

    pub fn left(&self, i: usize) -> &DVector<Complex64> {
        &self.lefts[i]
    }

    /// `y_i^H x_i`.
    pub fn overlap(&self, i: usize) -> Complex64 {
        self.overlaps[i]
    }

    pub fn overlaps(&self) -> &[Complex64] {
        &self.overlaps
    }

    /// Smallest pairwise eigenvalue distance.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }
}

pub(crate) fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub(crate) fn sort_lex(values: &mut [Complex64]) {
    values.sort_by(lex_cmp);
}

fn unit(v: DVector<Complex64>) -> DVector<Complex64> {
    let n = v.norm();
    if n > 0.0 {
        v / Complex64::new(n, 0.0)
    } else {
        v
    }
}

fn min_pairwise_gap(values: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// Complex Schur form `A = Q T Q^H` with `T` upper triangular.
pub(crate) fn schur(a: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    let max_iter = SCHUR_ITER_PER_DIM * n.max(2);
    if let Some(s) = Schur::try_new(a.clone(), f64::EPSILON, max_iter) {
        let (q, t) = s.unpack();
        if is_triangular(&t) {
            return Ok((q, t));
        }
    }
    // Plain shifted QR can stall on cyclic structure; a fixed unitary
    // similarity breaks it without changing the spectrum.
    let u = scrambling_unitary(n);
    let b = u.adjoint() * a * &u;
    let s = Schur::try_new(b, f64::EPSILON, 4 * max_iter).ok_or(Error::NonConvergence("Schur"))?;
    let (q, t) = s.unpack();
    if !is_triangular(&t) {
        return Err(Error::NonConvergence("Schur"));
    }
    Ok((u * q, t))
}

fn is_triangular(t: &DMatrix<Complex64>) -> bool {
    let n = t.nrows();
    (1..n).all(|i| (0..i).all(|j| t[(i, j)] == Complex64::new(0.0, 0.0)))
}

fn scrambling_unitary(n: usize) -> DMatrix<Complex64> {
    // Householder reflector from an irrational-angle vector.
    let v = DVector::from_fn(n, |i, _| {
        let t = (i as f64 + 1.0) * 0.754_877_666_246_692_7;
        Complex64::new(t.cos(), t.sin() * 0.5)
    });
    let v = unit(v);
    DMatrix::identity(n, n) - (&v * v.adjoint()) * Complex64::new(2.0, 0.0)
}

/// Right eigenvectors of an upper triangular matrix by back substitution.
fn triangular_eigenvectors(t: &DMatrix<Complex64>) -> Vec<DVector<Complex64>> {
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut v = DVector::<Complex64>::zeros(n);
            v[k] = Complex64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in i + 1..=k {
                    acc += t[(i, j)] * v[j];
                }
                let mut d = t[(i, i)] - lambda;
                if d.norm() < smin {
                    d = Complex64::new(smin, 0.0);
                }
                v[i] = -acc / d;
                let big = v.camax();
                if big > 1e150 {
                    v /= Complex64::new(big, 0.0);
                }
            }
            v
        })
        .collect()
}

/// Eigenvalues and right eigenvectors, unsorted.
fn right_pairs(a: &DMatrix<Complex64>) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let (q, t) = schur(a)?;
    let vs = triangular_eigenvectors(&t);
    Ok(vs
        .into_iter()
        .enumerate()
        .map(|(k, v)| (t[(k, k)], unit(&q * v)))
        .collect())
}

/// Eigenvalues of `a`, sorted lexicographically by `(re, im)`.
///
/// No simplicity requirement: this is the kernel used on perturbed matrices
/// that may sit arbitrarily close to defectivity.
pub fn spectrum(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a.as_matrix())?;
    let mut values: Vec<Complex64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    sort_lex(&mut values);
    Ok(values)
}

/// Eigenvalues with unit right and left eigenvectors, matched and phase-fixed.
///
/// Left eigenvectors are right eigenvectors of `A^H`, matched to the
/// eigenvalues of `A` by nearest conjugate eigenvalue.
pub fn eig_pairs(a: &DenseMatrix) -> Result<Eigensystem> {
    let m = a.as_matrix();
    let norm = a.frobenius_norm();
    let gap_tol = GAP_TOL_REL * norm;

    let rights = right_pairs(m)?;
    let lefts = right_pairs(&m.adjoint())?;

    let values: Vec<Complex64> = rights.iter().map(|p| p.0).collect();
    let min_gap = min_pairwise_gap(&values);
    if !(min_gap > gap_tol) {
        return Err(Error::DefectiveInput {
            min_gap,
            tol: gap_tol,
        });
    }

    let n = rights.len();
    let mut used = vec![false; n];
    let mut triples = Vec::with_capacity(n);
    for (lambda, x) in rights {
        let (j, dist) = lefts
            .iter()
            .enumerate()
            .map(|(j, (mu, _))| (j, (mu.conj() - lambda).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty spectrum");
        if used[j] || dist >= 0.5 * min_gap {
            return Err(Error::NonConvergence("left/right eigenvector matching"));
        }
        used[j] = true;
        triples.push((lambda, x, lefts[j].1.clone()));
    }

    let sys = Eigensystem::assemble(triples);

    let bound = TOL_EIG * norm;
    let adj = m.adjoint();
    for i in 0..n {
        let lambda = sys.eigenvalue(i);
        let x = sys.right(i);
        let y = sys.left(i);
        let rx = (m * x - x * lambda).norm();
        let ry = (&adj * y - y * lambda.conj()).norm();
        if rx > bound || ry > bound {
            return Err(Error::NonConvergence("eigenvector residual"));
        }
    }
    Ok(sys)
}

/// `J v` for the fundamental symplectic matrix `J = [[0, I], [-I, 0]]`.
pub fn apply_j(v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = v.len() / 2;
    DVector::from_fn(v.len(), |i, _| if i < n { v[i + n] } else { -v[i - n] })
}

/// Rotates each left eigenvector so that `y_i^H J x_i` is real.
///
/// The rotation closest to the identity is chosen, which makes the map
/// idempotent. `|y_i^H x_i|` and all norms are preserved; `y_i^H x_i` itself
/// generally acquires a phase.
pub fn hamiltonian_phase_normalize(sys: &Eigensystem, n_half: usize) -> Result<Eigensystem> {
    if !sys.dim().is_multiple_of(2) || sys.dim() != 2 * n_half {
        return Err(Error::DimensionMismatch {
            expected: 2 * n_half,
            found: sys.dim(),
        });
    }
    let mut out = sys.clone();
    for i in 0..out.dim() {
        let x = &out.rights[i];
        let w = out.lefts[i].dotc(&apply_j(x));
        let r = w.norm();
        if r == 0.0 || w.im.abs() <= PHASE_TOL * r {
            continue;
        }
        let mut phase = w / r;
        if w.re < 0.0 {
            phase = -phase;
        }
        let y = &out.lefts[i] * phase;
        out.overlaps[i] = y.dotc(x);
        out.lefts[i] = y;
    }
    Ok(out)
}
