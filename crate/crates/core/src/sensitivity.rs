//! Eigenvalue condition numbers, Wilkinson perturbations and coalescence
//! estimates of the distance to defectivity.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{hamiltonian_phase_normalize, Complex64, DenseMatrix, Eigensystem};
use crate::structures::{normalized_projection, project, StructurePattern, NORM_TOL};

/// Overlaps `|y^H x|` at or below this value are treated as vanishing.
pub const OVERLAP_TOL: f64 = 1e-14;

/// Pairs whose estimates agree to this relative tolerance count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Worst-case first-order perturbation direction for one eigenvalue.
#[derive(Clone, Debug)]
pub struct WilkinsonPerturbation {
    /// `y x^H`, unit Frobenius norm.
    pub base: DenseMatrix,
    /// Normalized projection of `base` onto the pattern (equal to `base` for `Full`).
    pub projected: DenseMatrix,
    pub eigen_index: usize,
    pub pattern: StructurePattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coalescence {
    pub epsilon: f64,
    pub pair: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub pattern: StructurePattern,
    pub eigenvalues: Vec<Complex64>,
    pub kappas: Vec<f64>,
    pub kappas_structured: Vec<f64>,
    pub epsilon: f64,
    pub epsilon_structured: f64,
    pub pair: (usize, usize),
    pub pair_structured: (usize, usize),
}

fn check_index(sys: &Eigensystem, i: usize) -> Result<()> {
    if i >= sys.dim() {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue index {i} out of range for dimension {}",
            sys.dim()
        )));
    }
    Ok(())
}

fn check_pattern(sys: &Eigensystem, s: &StructurePattern) -> Result<()> {
    if sys.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: sys.dim(),
        });
    }
    Ok(())
}

fn overlap_modulus(sys: &Eigensystem, i: usize) -> Result<f64> {
    check_index(sys, i)?;
    let s = sys.overlap(i).norm();
    if !(s > OVERLAP_TOL) {
        return Err(Error::VanishingOverlap { index: i });
    }
    Ok(s)
}

/// The system in the phase convention the pattern requires.
pub fn normalized_for<'a>(
    sys: &'a Eigensystem,
    s: &StructurePattern,
) -> Result<Cow<'a, Eigensystem>> {
    check_pattern(sys, s)?;
    match s.n_half() {
        Some(n_half) => Ok(Cow::Owned(hamiltonian_phase_normalize(sys, n_half)?)),
        None => Ok(Cow::Borrowed(sys)),
    }
}

/// `kappa(lambda_i) = 1 / |y_i^H x_i|`.
pub fn cond_standard(sys: &Eigensystem, i: usize) -> Result<f64> {
    Ok(1.0 / overlap_modulus(sys, i)?)
}

fn outer(sys: &Eigensystem, i: usize) -> Result<DenseMatrix> {
    DenseMatrix::outer(sys.left(i), sys.right(i))
}

fn structured_from(sys: &Eigensystem, i: usize, s: &StructurePattern) -> Result<f64> {
    let overlap = overlap_modulus(sys, i)?;
    if s.is_full() {
        return Ok(1.0 / overlap);
    }
    let p = project(&outer(sys, i)?, s)?;
    Ok(p.frobenius_norm() / overlap)
}

/// `kappa^S(lambda_i) = ||(y_i x_i^H)|_S||_F / |y_i^H x_i|`.
///
/// Hamiltonian patterns use the phase-normalized triple, which is the phase
/// that maximizes the projection norm.
pub fn cond_structured(sys: &Eigensystem, i: usize, s: &StructurePattern) -> Result<f64> {
    check_index(sys, i)?;
    let sys = normalized_for(sys, s)?;
    structured_from(&sys, i, s)
}

/// All `kappa^S` values, normalizing the system once.
pub fn cond_structured_all(sys: &Eigensystem, s: &StructurePattern) -> Result<Vec<f64>> {
    let sys = normalized_for(sys, s)?;
    (0..sys.dim()).map(|i| structured_from(&sys, i, s)).collect()
}

pub fn cond_standard_all(sys: &Eigensystem) -> Result<Vec<f64>> {
    (0..sys.dim()).map(|i| cond_standard(sys, i)).collect()
}

pub fn wilkinson(sys: &Eigensystem, i: usize, s: &StructurePattern) -> Result<WilkinsonPerturbation> {
    check_index(sys, i)?;
    let sys = normalized_for(sys, s)?;
    let base = outer(&sys, i)?;
    let projected = if s.is_full() {
        base.clone()
    } else {
        normalized_projection(&base, s)?
    };
    Ok(WilkinsonPerturbation {
        base,
        projected,
        eigen_index: i,
        pattern: s.clone(),
    })
}

/// Radius `kappa^S(lambda_i) t` of the (structured) Wilkinson disk.
pub fn disk_radius(sys: &Eigensystem, i: usize, t: f64, s: &StructurePattern) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("disk parameter {t} is negative")));
    }
    Ok(cond_structured(sys, i, s)? * t)
}

/// Minimizes `|lambda_i - lambda_j| / (kappa_i + kappa_j)` over `i < j`.
///
/// Eigenvalues whose condition number is zero are skipped.
pub fn pair_minimum(eigenvalues: &[Complex64], kappas: &[f64]) -> Result<Coalescence> {
    let eligible: Vec<usize> = (0..eigenvalues.len()).filter(|&i| kappas[i] > 0.0).collect();
    let mut best: Option<Coalescence> = None;
    for (a, &i) in eligible.iter().enumerate() {
        for &j in &eligible[a + 1..] {
            let eps = (eigenvalues[i] - eigenvalues[j]).norm() / (kappas[i] + kappas[j]);
            let better = match best {
                None => true,
                Some(b) => eps < b.epsilon * (1.0 - TIE_TOL),
            };
            if better {
                best = Some(Coalescence {
                    epsilon: eps,
                    pair: (i, j),
                });
            }
        }
    }
    best.ok_or(Error::DegenerateSpectrum)
}

fn condition_vector(sys: &Eigensystem, s: &StructurePattern) -> Result<Vec<f64>> {
    let kappas = cond_structured_all(sys, s)?;
    if s.is_full() {
        return Ok(kappas);
    }
    // A projection that vanishes at working precision is exact first-order immunity.
    let standard = cond_standard_all(sys)?;
    Ok(kappas
        .into_iter()
        .zip(standard)
        .enumerate()
        .map(|(i, (ks, k))| {
            if ks <= NORM_TOL * k {
                log::warn!("eigenvalue {i} has vanishing structured condition number; excluded");
                0.0
            } else {
                ks
            }
        })
        .collect())
}

/// Estimate of the (structured) distance to defectivity from Wilkinson-disk
/// tangency, with the most sensitive pair.
pub fn coalescence_estimate(sys: &Eigensystem, s: &StructurePattern) -> Result<Coalescence> {
    check_pattern(sys, s)?;
    if sys.dim() < 2 {
        return Err(Error::DegenerateSpectrum);
    }
    let kappas = condition_vector(sys, s)?;
    pair_minimum(sys.eigenvalues(), &kappas)
}

pub fn analyze(sys: &Eigensystem, s: &StructurePattern) -> Result<SensitivityReport> {
    check_pattern(sys, s)?;
    let kappas = cond_standard_all(sys)?;
    let kappas_structured = cond_structured_all(sys, s)?;
    let full = pair_minimum(sys.eigenvalues(), &kappas)?;
    let structured = coalescence_estimate(sys, s)?;
    Ok(SensitivityReport {
        pattern: s.clone(),
        eigenvalues: sys.eigenvalues().to_vec(),
        kappas,
        kappas_structured,
        epsilon: full.epsilon,
        epsilon_structured: structured.epsilon,
        pair: full.pair,
        pair_structured: structured.pair,
    })
}
