//! Seeded generators for the three example matrix families.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use pseudospec_core::numkernel::{Complex64, DenseMatrix};
use pseudospec_core::structures::{project, StructurePattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::files::{GeneratorInfo, MatrixFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Real tridiagonal Toeplitz; subdiagonal in [0, 5], diagonal and superdiagonal in [0, 1].
    #[value(name = "tridiag_toeplitz")]
    TridiagToeplitz,
    /// Complex pentadiagonal Toeplitz with the same intervals for real and imaginary parts.
    #[value(name = "pentadiag_toeplitz")]
    PentadiagToeplitz,
    /// Nearest Hamiltonian matrix to a real matrix with entries in [0, 1].
    #[value(name = "hamiltonian_random")]
    HamiltonianRandom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::TridiagToeplitz => "tridiag_toeplitz",
            Self::PentadiagToeplitz => "pentadiag_toeplitz",
            Self::HamiltonianRandom => "hamiltonian_random",
        }
    }

    pub fn default_order(&self) -> usize {
        match self {
            Self::TridiagToeplitz => 5,
            Self::PentadiagToeplitz => 10,
            Self::HamiltonianRandom => 8,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::value_variants()
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::UnknownFamily(s.to_string()))
    }
}

const SUB_MAX: f64 = 5.0;
const REST_MAX: f64 = 1.0;

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Banded Toeplitz matrix from `(offset, value)` pairs.
fn banded(n: usize, diagonals: &[(isize, Complex64)]) -> Result<DenseMatrix> {
    Ok(DenseMatrix::from_fn(n, |i, j| {
        let d = j as isize - i as isize;
        diagonals
            .iter()
            .find(|(o, _)| *o == d)
            .map_or(Complex64::new(0.0, 0.0), |(_, v)| *v)
    })?)
}

fn complex_value(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

/// Draws a matrix of `family` with order `n` (family default when `None`).
pub fn generate(family: Family, n: Option<usize>, seed: u64) -> Result<MatrixFile> {
    let n = n.unwrap_or(family.default_order());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parameters = BTreeMap::new();
    parameters.insert("n".to_string(), Value::from(n));
    let (matrix, structure) = match family {
        Family::TridiagToeplitz => {
            if n < 2 {
                return Err(CliError::BadParams(format!("order {n} is below 2")));
            }
            let sub = rng.random_range(0.0..=SUB_MAX);
            let diag = rng.random_range(0.0..=REST_MAX);
            let sup = rng.random_range(0.0..=REST_MAX);
            parameters.insert("sub".into(), Value::from(sub));
            parameters.insert("diag".into(), Value::from(diag));
            parameters.insert("sup".into(), Value::from(sup));
            let a = banded(n, &[(-1, real(sub)), (0, real(diag)), (1, real(sup))])?;
            let s = StructurePattern::toeplitz(n, [-1, 0, 1])?.with_real(true);
            (a, s)
        }
        Family::PentadiagToeplitz => {
            if n < 3 {
                return Err(CliError::BadParams(format!(
                    "order {n} is below 3, too small for five diagonals"
                )));
            }
            let mut draw = |hi: f64| {
                let re = rng.random_range(0.0..=hi);
                let im = rng.random_range(0.0..=hi);
                Complex64::new(re, im)
            };
            let names = ["sub2", "sub1", "diag", "sup1", "sup2"];
            let mut diagonals = Vec::with_capacity(5);
            for (k, name) in names.iter().enumerate() {
                let offset = k as isize - 2;
                let v = draw(if offset < 0 { SUB_MAX } else { REST_MAX });
                parameters.insert(name.to_string(), complex_value(v));
                diagonals.push((offset, v));
            }
            let a = banded(n, &diagonals)?;
            let s = StructurePattern::toeplitz(n, -2..=2)?;
            (a, s)
        }
        Family::HamiltonianRandom => {
            if n < 2 || !n.is_multiple_of(2) {
                return Err(CliError::BadParams(format!(
                    "Hamiltonian order must be even and at least 2, got {n}"
                )));
            }
            let m = DenseMatrix::from_fn(n, |_, _| real(rng.random_range(0.0..=REST_MAX)))?;
            let s = StructurePattern::hamiltonian(n / 2)?.with_real(true);
            (project(&m, &s)?, s)
        }
    };
    Ok(MatrixFile::from_matrix(
        &matrix,
        Some(structure),
        Some(GeneratorInfo {
            family: family.name().to_string(),
            seed,
            parameters,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pseudospec_core::structures::is_member;

    #[test]
    fn tridiagonal_ranges_and_structure() {
        for seed in 0..20 {
            let f = generate(Family::TridiagToeplitz, None, seed).unwrap();
            let a = f.to_matrix().unwrap();
            assert_eq!(a.dim(), 5);
            assert!(a.is_real(0.0));
            let sub = a[(1, 0)].re;
            let diag = a[(0, 0)].re;
            let sup = a[(0, 1)].re;
            assert!((0.0..=5.0).contains(&sub));
            assert!((0.0..=1.0).contains(&diag) && (0.0..=1.0).contains(&sup));
            assert_eq!(a[(0, 2)], Complex64::new(0.0, 0.0));
            assert!(is_member(&a, f.structure.as_ref().unwrap()).unwrap());
        }
    }

    #[test]
    fn pentadiagonal_is_complex_banded() {
        let f = generate(Family::PentadiagToeplitz, None, 3).unwrap();
        let a = f.to_matrix().unwrap();
        assert_eq!(a.dim(), 10);
        assert!(!a.is_real(0.0));
        assert_eq!(a[(0, 3)], Complex64::new(0.0, 0.0));
        assert!(a[(2, 0)].re <= 5.0 && a[(0, 2)].im <= 1.0);
        assert!(is_member(&a, f.structure.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn hamiltonian_is_real_member() {
        let f = generate(Family::HamiltonianRandom, Some(8), 11).unwrap();
        let a = f.to_matrix().unwrap();
        assert!(a.is_real(0.0));
        let s = StructurePattern::hamiltonian(4).unwrap();
        assert!(is_member(&a, &s).unwrap());
        assert!(matches!(
            generate(Family::HamiltonianRandom, Some(7), 1),
            Err(CliError::BadParams(_))
        ));
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::value_variants() {
            assert_eq!(f.name().parse::<Family>().unwrap(), *f);
        }
        assert!(matches!(
            "circulant".parse::<Family>(),
            Err(CliError::UnknownFamily(_))
        ));
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = generate(Family::PentadiagToeplitz, None, 5).unwrap();
        let b = generate(Family::PentadiagToeplitz, None, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(Family::PentadiagToeplitz, None, 6).unwrap());
    }
}
