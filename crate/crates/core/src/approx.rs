//! Perturbation sweeps that approximate (structured) pseudospectra.
//!
//! The Wilkinson sweep traces, for each selected eigenvalue, the spectra of
//! `A + eta * epsilon * W` with `W` the normalized (projected) Wilkinson
//! perturbation and `eta = exp(i theta_k)`, `theta_k = 2 pi k / K`. The random
//! baseline replaces `W` by random unit-norm (structured) perturbations.

use std::f64::consts::PI;

use rayon::prelude::*;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{spectrum, Complex64, DenseMatrix, Eigensystem};
use crate::sensitivity::{coalescence_estimate, wilkinson};
use crate::structures::{
    normalized_projection, random_member, random_rank_one, substream_seed, StructurePattern,
};

pub const DEFAULT_ANGLES: usize = 1000;

/// Which unimodular scalars multiply the perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaMode {
    /// `K` equispaced points on the unit circle.
    Unimodular,
    /// Only `eta = +1` and `eta = -1`; keeps real-linear structure (Hamiltonian).
    Real,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    /// The pair minimizing the coalescence estimate for the pattern.
    MostSensitivePair,
    Pair(usize, usize),
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub epsilon: f64,
    angles: usize,
    pub pattern: StructurePattern,
    pub target: SweepTarget,
    pub eta: EtaMode,
}

impl SweepConfig {
    pub fn new(epsilon: f64, pattern: StructurePattern) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            angles: DEFAULT_ANGLES,
            pattern,
            target: SweepTarget::MostSensitivePair,
            eta: EtaMode::Unimodular,
        })
    }

    /// Configuration at the coalescence estimate for `pattern`.
    pub fn at_coalescence(sys: &Eigensystem, pattern: StructurePattern) -> Result<Self> {
        let est = coalescence_estimate(sys, &pattern)?;
        Self::new(est.epsilon, pattern)
    }

    pub fn with_angles(mut self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("angle count must be at least 1".into()));
        }
        self.angles = k;
        Ok(self)
    }

    pub fn with_target(mut self, target: SweepTarget) -> Self {
        self.target = target;
        self
    }

    pub fn with_eta(mut self, eta: EtaMode) -> Self {
        self.eta = eta;
        self
    }

    /// Requested `K`; the real mode always uses two angles.
    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn angle_count(&self) -> usize {
        match self.eta {
            EtaMode::Unimodular => self.angles,
            EtaMode::Real => 2,
        }
    }

    /// `theta_k` for zero-based `k`.
    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.angle_count() as f64
    }

    pub fn eta(&self, k: usize) -> Complex64 {
        match self.eta {
            EtaMode::Real if k == 0 => Complex64::new(1.0, 0.0),
            EtaMode::Real => Complex64::new(-1.0, 0.0),
            EtaMode::Unimodular => Complex64::from_polar(1.0, self.angle(k)),
        }
    }

    /// Eigenvalue indices to sweep.
    pub fn targets(&self, sys: &Eigensystem) -> Result<Vec<usize>> {
        let n = sys.dim();
        match self.target {
            SweepTarget::MostSensitivePair => {
                let (i, j) = coalescence_estimate(sys, &self.pattern)?.pair;
                Ok(vec![i, j])
            }
            SweepTarget::Pair(i, j) => {
                if i >= n || j >= n || i == j {
                    return Err(Error::InvalidArgument(format!(
                        "pair ({i}, {j}) invalid for dimension {n}"
                    )));
                }
                Ok(vec![i, j])
            }
            SweepTarget::All => Ok((0..n).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudKind {
    WilkinsonSweep,
    RandomBaseline,
    Trajectory,
}

impl CloudKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::WilkinsonSweep => "wilkinson_sweep",
            Self::RandomBaseline => "random_baseline",
            Self::Trajectory => "trajectory",
        }
    }
}

/// One perturbed eigenvalue with provenance.
///
/// For trajectories `angle_index` is the step on the epsilon grid and
/// `sample_index` is 0 for the given direction, 1 for its projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub z: Complex64,
    pub source_eigen: usize,
    pub angle_index: usize,
    pub sample_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
    pub epsilon: f64,
    pub pattern: StructurePattern,
    pub kind: CloudKind,
    pub angles: usize,
    pub samples: usize,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.z).collect()
    }

    /// Points generated from eigenvalue `i`.
    pub fn sub_cloud(&self, i: usize) -> Vec<Complex64> {
        self.points
            .iter()
            .filter(|p| p.source_eigen == i)
            .map(|p| p.z)
            .collect()
    }

    /// Distinct `source_eigen` tags in increasing order.
    pub fn sources(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.points.iter().map(|p| p.source_eigen).collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

fn point_order(a: &CloudPoint, b: &CloudPoint) -> std::cmp::Ordering {
    (a.source_eigen, a.angle_index, a.sample_index)
        .cmp(&(b.source_eigen, b.angle_index, b.sample_index))
        .then(a.z.re.total_cmp(&b.z.re))
        .then(a.z.im.total_cmp(&b.z.im))
}

/// Algorithm 1 (`Full`) and Algorithm 2 (structured patterns).
pub fn sweep_wilkinson(a: &DenseMatrix, sys: &Eigensystem, cfg: &SweepConfig) -> Result<PointCloud> {
    if a.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: sys.dim(),
        });
    }
    let targets = cfg.targets(sys)?;
    let directions: Vec<(usize, DenseMatrix)> = targets
        .iter()
        .map(|&i| Ok((i, wilkinson(sys, i, &cfg.pattern)?.projected)))
        .collect::<Result<_>>()?;
    let k_count = cfg.angle_count();
    let work: Vec<(usize, usize)> = (0..directions.len())
        .flat_map(|d| (0..k_count).map(move |k| (d, k)))
        .collect();
    let spectra: Vec<Vec<CloudPoint>> = work
        .par_iter()
        .map(|&(d, k)| {
            let (source, w) = &directions[d];
            let e = w.scale(cfg.eta(k) * cfg.epsilon);
            let values = spectrum(&(a + &e))?;
            Ok(values
                .into_iter()
                .map(|z| CloudPoint {
                    z,
                    source_eigen: *source,
                    angle_index: k,
                    sample_index: 0,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(PointCloud {
        points: spectra.into_iter().flatten().collect(),
        epsilon: cfg.epsilon,
        pattern: cfg.pattern.clone(),
        kind: CloudKind::WilkinsonSweep,
        angles: k_count,
        samples: 1,
    })
}

/// Random unit-norm perturbation number `sample` of the baseline with `seed`.
pub fn baseline_perturbation(
    pattern: &StructurePattern,
    seed: u64,
    sample: usize,
) -> Result<DenseMatrix> {
    let sub = substream_seed(seed, sample as u64);
    if pattern.is_full() {
        random_rank_one(pattern.dim(), sub)
    } else {
        random_member(pattern, sub)
    }
}

fn nearest_index(values: &[Complex64], z: Complex64) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.iter().enumerate() {
        let d = (v - z).norm();
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Spectra of `A + epsilon eta_k E_s` for random unit-norm `E_s`.
///
/// Each point is tagged with the nearest eigenvalue of `A`.
pub fn random_cloud(
    a: &DenseMatrix,
    cfg: &SweepConfig,
    samples: usize,
    seed: u64,
) -> Result<PointCloud> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    if a.dim() != cfg.pattern.dim() {
        return Err(Error::DimensionMismatch {
            expected: cfg.pattern.dim(),
            found: a.dim(),
        });
    }
    let base = spectrum(a)?;
    let k_count = cfg.angle_count();
    let mut points: Vec<CloudPoint> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let e = baseline_perturbation(&cfg.pattern, seed, s)?;
            let mut out = Vec::with_capacity(k_count * a.dim());
            for k in 0..k_count {
                let values = spectrum(&(a + &e.scale(cfg.eta(k) * cfg.epsilon)))?;
                out.extend(values.into_iter().map(|z| CloudPoint {
                    z,
                    source_eigen: nearest_index(&base, z),
                    angle_index: k,
                    sample_index: s,
                }));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    points.par_sort_by(point_order);
    Ok(PointCloud {
        points,
        epsilon: cfg.epsilon,
        pattern: cfg.pattern.clone(),
        kind: CloudKind::RandomBaseline,
        angles: k_count,
        samples,
    })
}

/// First-order paths `lambda_i + t (y_i^H E x_i) / (y_i^H x_i)` over `eps_grid`.
///
/// For a structured pattern a second family uses the normalized projection of
/// `E` (`sample_index` 1).
pub fn first_order_trajectories(
    sys: &Eigensystem,
    e: &DenseMatrix,
    eps_grid: &[f64],
    pattern: &StructurePattern,
) -> Result<PointCloud> {
    if e.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: e.dim(),
        });
    }
    if (e.frobenius_norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "direction must have unit Frobenius norm, got {}",
            e.frobenius_norm()
        )));
    }
    if eps_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("epsilon grid must be finite and nonnegative".into()));
    }
    let mut directions = vec![e.clone()];
    if !pattern.is_full() {
        directions.push(normalized_projection(e, pattern)?);
    }
    let mut points = Vec::with_capacity(sys.dim() * eps_grid.len() * directions.len());
    for i in 0..sys.dim() {
        let overlap = sys.overlap(i);
        if !(overlap.norm() > crate::sensitivity::OVERLAP_TOL) {
            return Err(Error::VanishingOverlap { index: i });
        }
        let slopes: Vec<Complex64> = directions
            .iter()
            .map(|d| d.bilinear(sys.left(i), sys.right(i)) / overlap)
            .collect();
        for (step, &t) in eps_grid.iter().enumerate() {
            for (sample, slope) in slopes.iter().enumerate() {
                points.push(CloudPoint {
                    z: sys.eigenvalue(i) + slope * t,
                    source_eigen: i,
                    angle_index: step,
                    sample_index: sample,
                });
            }
        }
    }
    Ok(PointCloud {
        points,
        epsilon: eps_grid.iter().copied().fold(0.0, f64::max),
        pattern: pattern.clone(),
        kind: CloudKind::Trajectory,
        angles: eps_grid.len(),
        samples: directions.len(),
    })
}

/// Unit-norm all-ones direction, projected onto the pattern when structured.
pub fn ones_direction(n: usize, pattern: &StructurePattern) -> Result<DenseMatrix> {
    let ones = DenseMatrix::ones(n)?;
    if pattern.is_full() {
        Ok(ones.scale_real(1.0 / n as f64))
    } else {
        normalized_projection(&ones, pattern)
    }
}

fn ones_perturbed_spectrum(
    a: &DenseMatrix,
    epsilon: f64,
    pattern: &StructurePattern,
) -> Result<Vec<Complex64>> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let e = ones_direction(a.dim(), pattern)?;
    spectrum(&(a + &e.scale_real(epsilon)))
}

/// Lower bound for the (structured) pseudospectral abscissa from the all-ones
/// perturbation.
pub fn abscissa_lower_bound(
    a: &DenseMatrix,
    epsilon: f64,
    pattern: &StructurePattern,
) -> Result<f64> {
    let values = ones_perturbed_spectrum(a, epsilon, pattern)?;
    Ok(values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// As [`abscissa_lower_bound`] with the modulus in place of the real part.
pub fn radius_lower_bound(a: &DenseMatrix, epsilon: f64, pattern: &StructurePattern) -> Result<f64> {
    let values = ones_perturbed_spectrum(a, epsilon, pattern)?;
    Ok(values.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn nearest_distances(from: &[Complex64], to: &[Complex64]) -> Vec<f64> {
    let tree = RTree::bulk_load(to.iter().map(|z| [z.re, z.im]).collect());
    from.iter()
        .map(|z| {
            let q = tree.nearest_neighbor([z.re, z.im]).expect("nonempty tree");
            (q[0] - z.re).hypot(q[1] - z.im)
        })
        .collect()
}

/// Smallest distance between a point of `a` and a point of `b`.
pub fn min_cross_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    nearest_distances(a, b).into_iter().fold(f64::INFINITY, f64::min)
}

/// Directed Hausdorff distance: largest distance from a point of `from` to
/// its nearest point of `to`.
pub fn coverage_gap(from: &[Complex64], to: &[Complex64]) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return f64::INFINITY;
    }
    nearest_distances(from, to).into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::eig_pairs;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn full(n: usize) -> StructurePattern {
        StructurePattern::full(n).unwrap()
    }

    #[test]
    fn single_angle_diagonal_sweep() {
        let a = DenseMatrix::diagonal(&[c(0.0, 0.0), c(3.0, 0.0)]).unwrap();
        let sys = eig_pairs(&a).unwrap();
        let cfg = SweepConfig::new(0.1, full(2))
            .unwrap()
            .with_angles(1)
            .unwrap()
            .with_target(SweepTarget::Pair(0, 1));
        let cloud = sweep_wilkinson(&a, &sys, &cfg).unwrap();
        assert_eq!(cloud.len(), 4);
        let first: Vec<Complex64> = cloud.sub_cloud(0);
        assert!(first.contains(&c(0.1, 0.0)));
        assert!(first.contains(&c(3.0, 0.0)));
        assert_eq!(cloud.sources(), vec![0, 1]);
    }

    #[test]
    fn sweep_counts_and_order() {
        let a = crate::numkernel::tridiag_toeplitz(4, c(2.0, 0.0), c(0.3, 0.0), c(0.5, 0.0)).unwrap();
        let sys = eig_pairs(&a).unwrap();
        let cfg = SweepConfig::new(1e-3, full(4)).unwrap().with_angles(16).unwrap();
        let cloud = sweep_wilkinson(&a, &sys, &cfg).unwrap();
        assert_eq!(cloud.len(), 2 * 16 * 4);
        assert!(cloud.points.windows(2).all(|w| point_order(&w[0], &w[1]).is_le()));
        let all = cfg.clone().with_target(SweepTarget::All);
        assert_eq!(sweep_wilkinson(&a, &sys, &all).unwrap().len(), 4 * 16 * 4);
        let real = cfg.with_eta(EtaMode::Real);
        assert_eq!(sweep_wilkinson(&a, &sys, &real).unwrap().len(), 2 * 2 * 4);
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::new(0.0, full(2)).is_err());
        assert!(SweepConfig::new(f64::NAN, full(2)).is_err());
        assert!(SweepConfig::new(1.0, full(2)).unwrap().with_angles(0).is_err());
        let a = DenseMatrix::diagonal(&[c(0.0, 0.0), c(3.0, 0.0)]).unwrap();
        let sys = eig_pairs(&a).unwrap();
        let bad = SweepConfig::new(1.0, full(2)).unwrap().with_target(SweepTarget::Pair(0, 2));
        assert!(sweep_wilkinson(&a, &sys, &bad).is_err());
        let same = SweepConfig::new(1.0, full(2)).unwrap().with_target(SweepTarget::Pair(1, 1));
        assert!(sweep_wilkinson(&a, &sys, &same).is_err());
    }

    #[test]
    fn eta_values() {
        let cfg = SweepConfig::new(1.0, full(2)).unwrap().with_angles(4).unwrap();
        assert!((cfg.eta(1) - c(0.0, 1.0)).norm() < 1e-15);
        let real = cfg.with_eta(EtaMode::Real);
        assert_eq!(real.eta(0), c(1.0, 0.0));
        assert_eq!(real.eta(1), c(-1.0, 0.0));
        assert_eq!(real.angle_count(), 2);
    }

    #[test]
    fn single_random_sample_matches_direct_spectrum() {
        let a = crate::numkernel::tridiag_toeplitz(3, c(1.0, 0.0), c(0.0, 0.0), c(0.4, 0.0)).unwrap();
        let cfg = SweepConfig::new(0.05, full(3)).unwrap().with_angles(1).unwrap();
        let cloud = random_cloud(&a, &cfg, 1, 99).unwrap();
        let e = baseline_perturbation(&full(3), 99, 0).unwrap();
        let mut direct = spectrum(&(&a + &e.scale_real(0.05))).unwrap();
        let mut got = cloud.values();
        let key = |z: &Complex64, w: &Complex64| z.re.total_cmp(&w.re).then(z.im.total_cmp(&w.im));
        direct.sort_by(key);
        got.sort_by(key);
        assert_eq!(got, direct);
        assert_eq!(cloud.len(), 3);
        assert!(random_cloud(&a, &cfg, 0, 1).is_err());
    }

    #[test]
    fn random_cloud_is_deterministic() {
        let a = crate::numkernel::tridiag_toeplitz(4, c(1.0, 0.0), c(0.2, 0.0), c(0.4, 0.0)).unwrap();
        let s = StructurePattern::toeplitz_support_of(&a).unwrap();
        let cfg = SweepConfig::new(0.01, s).unwrap().with_angles(8).unwrap();
        let x = random_cloud(&a, &cfg, 5, 7).unwrap();
        let y = random_cloud(&a, &cfg, 5, 7).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.len(), 4 * 8 * 5);
        assert_ne!(x, random_cloud(&a, &cfg, 5, 8).unwrap());
    }

    #[test]
    fn trajectories_start_at_eigenvalues_and_move_linearly() {
        let a = DenseMatrix::diagonal(&[c(0.0, 0.0), c(2.0, 0.0), c(5.0, 0.0)]).unwrap();
        let sys = eig_pairs(&a).unwrap();
        let w = wilkinson(&sys, 1, &full(3)).unwrap().projected;
        let eta = Complex64::from_polar(1.0, 0.7);
        let grid = [0.0, 0.1, 0.2];
        let traj = first_order_trajectories(&sys, &w.scale(eta), &grid, &full(3)).unwrap();
        assert_eq!(traj.len(), 9);
        for p in &traj.points {
            if p.angle_index == 0 {
                assert_eq!(p.z, sys.eigenvalue(p.source_eigen));
            }
            if p.source_eigen == 1 {
                let expect = c(2.0, 0.0) + eta * grid[p.angle_index];
                assert!((p.z - expect).norm() < 1e-14);
            }
        }
        let bad = w.scale_real(2.0);
        assert!(first_order_trajectories(&sys, &bad, &grid, &full(3)).is_err());
    }

    #[test]
    fn abscissa_of_diagonal_pair() {
        let a = DenseMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        for eps in [1e-3, 1e-2, 0.1, 1.0] {
            let b = abscissa_lower_bound(&a, eps, &full(2)).unwrap();
            let expect = eps / 2.0 + (1.0 + eps * eps / 4.0).sqrt();
            assert!((b - expect).abs() < 1e-12, "{b} vs {expect}");
            assert!(b >= 1.0 + eps / 2.0);
        }
        assert!(abscissa_lower_bound(&a, 0.0, &full(2)).is_err());
    }

    #[test]
    fn radius_of_zero_matrix() {
        let z = DenseMatrix::zeros(2).unwrap();
        let r = radius_lower_bound(&z, 1.0, &full(2)).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bounds_approach_spectral_values() {
        let a = DenseMatrix::diagonal(&[c(0.5, 1.0), c(-2.0, 0.0), c(0.2, -3.0)]).unwrap();
        let b = abscissa_lower_bound(&a, 1e-10, &full(3)).unwrap();
        let r = radius_lower_bound(&a, 1e-10, &full(3)).unwrap();
        assert!((b - 0.5).abs() < 1e-9);
        assert!((r - (0.04f64 + 9.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn distance_helpers() {
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(0.0, 3.0), c(1.0, 0.5)];
        assert!((min_cross_distance(&a, &b) - 0.5).abs() < 1e-15);
        assert!((coverage_gap(&a, &b) - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(coverage_gap(&[], &b), 0.0);
        assert_eq!(min_cross_distance(&a, &[]), f64::INFINITY);
    }
}
