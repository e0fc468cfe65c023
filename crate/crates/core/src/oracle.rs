//! Spectral-norm pseudospectrum ground truth on rectangular grids.
//!
//! `z` lies in the epsilon-pseudospectrum iff `sigma_min(A - zI) <= epsilon`.
//! Frobenius-bounded perturbations have spectral norm at most their Frobenius
//! norm, so every cloud point built from an `epsilon`-perturbation satisfies
//! the same inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::PointCloud;
use crate::error::{Error, Result};
use crate::numkernel::{sigma_min, Complex64, DenseMatrix, Eigensystem};
use crate::sensitivity::cond_standard_all;

pub const DEFAULT_RESOLUTION: (usize, usize) = (200, 200);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite())
            && re_min < re_max
            && im_min < im_max;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "degenerate window [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Bounding box of `points` padded by `pad` on every side.
    pub fn around(points: &[Complex64], pad: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("no points to bound".into()));
        }
        let (mut a, mut b, mut c, mut d) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for z in points {
            a = a.min(z.re);
            b = b.max(z.re);
            c = c.min(z.im);
            d = d.max(z.im);
        }
        Self::new(a - pad, b + pad, c - pad, d + pad)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Overlap of the two windows, `None` when it is empty or degenerate.
    pub fn intersect(&self, other: &Window) -> Option<Window> {
        Window::new(
            self.re_min.max(other.re_min),
            self.re_max.min(other.re_max),
            self.im_min.max(other.im_min),
            self.im_max.min(other.im_max),
        )
        .ok()
    }

    /// Smallest window containing both.
    pub fn union(&self, other: &Window) -> Window {
        Window {
            re_min: self.re_min.min(other.re_min),
            re_max: self.re_max.max(other.re_max),
            im_min: self.im_min.min(other.im_min),
            im_max: self.im_max.max(other.im_max),
        }
    }
}

/// Spectrum bounding box padded by `2 epsilon max_i kappa(lambda_i)`.
pub fn default_window(sys: &Eigensystem, epsilon: f64) -> Result<Window> {
    let kmax = cond_standard_all(sys)?.into_iter().fold(1.0, f64::max);
    let mut pad = 2.0 * epsilon * kmax;
    if !(pad > 0.0) {
        pad = 1.0;
    }
    Window::around(sys.eigenvalues(), pad)
}

/// Bounding box of the numerical range padded by `epsilon`.
///
/// The epsilon-pseudospectrum lies inside the epsilon-neighbourhood of the
/// numerical range, so this box contains it.
pub fn enclosing_window(a: &DenseMatrix, epsilon: f64) -> Result<Window> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let m = a.as_matrix();
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let k = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    let range = |x: nalgebra::DMatrix<Complex64>| {
        let ev = x.symmetric_eigenvalues();
        (ev.min(), ev.max())
    };
    let (re_lo, re_hi) = range(h);
    let (im_lo, im_hi) = range(k);
    Window::new(re_lo - epsilon, re_hi + epsilon, im_lo - epsilon, im_hi + epsilon)
}

/// `sigma_min(A - zI)` at the cell centers of a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub window: Window,
    pub n_re: usize,
    pub n_im: usize,
    /// Row-major by imaginary index: `values[i_im * n_re + i_re]`.
    pub values: Vec<f64>,
}

/// Sides of the window touched by a level set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeContact {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

impl EdgeContact {
    pub fn any(&self) -> bool {
        self.left || self.right || self.bottom || self.top
    }
}

impl GridField {
    pub fn cell_width(&self) -> f64 {
        (self.window.re_max - self.window.re_min) / self.n_re as f64
    }

    pub fn cell_height(&self) -> f64 {
        (self.window.im_max - self.window.im_min) / self.n_im as f64
    }

    pub fn cell_diameter(&self) -> f64 {
        self.cell_width().hypot(self.cell_height())
    }

    pub fn center(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(
            self.window.re_min + (i_re as f64 + 0.5) * self.cell_width(),
            self.window.im_min + (i_im as f64 + 0.5) * self.cell_height(),
        )
    }

    pub fn value(&self, i_re: usize, i_im: usize) -> f64 {
        self.values[i_im * self.n_re + i_re]
    }

    /// Cell whose closed rectangle contains `z`.
    pub fn cell_of(&self, z: Complex64) -> Result<(usize, usize)> {
        if !self.window.contains(z) {
            return Err(Error::OutOfBounds { re: z.re, im: z.im });
        }
        let i_re = ((z.re - self.window.re_min) / self.cell_width()).floor() as usize;
        let i_im = ((z.im - self.window.im_min) / self.cell_height()).floor() as usize;
        Ok((i_re.min(self.n_re - 1), i_im.min(self.n_im - 1)))
    }

    /// Membership flags of the `epsilon` level set, same layout as `values`.
    pub fn level_set(&self, epsilon: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v <= epsilon).collect()
    }

    pub fn edge_contact(&self, epsilon: f64) -> EdgeContact {
        let inside = |i: usize, j: usize| self.value(i, j) <= epsilon;
        EdgeContact {
            left: (0..self.n_im).any(|j| inside(0, j)),
            right: (0..self.n_im).any(|j| inside(self.n_re - 1, j)),
            bottom: (0..self.n_re).any(|i| inside(i, 0)),
            top: (0..self.n_re).any(|i| inside(i, self.n_im - 1)),
        }
    }
}

pub fn grid_field(a: &DenseMatrix, window: Window, resolution: (usize, usize)) -> Result<GridField> {
    let (n_re, n_im) = resolution;
    if n_re < 2 || n_im < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution {n_re}x{n_im} is below 2x2"
        )));
    }
    let mut field = GridField {
        window,
        n_re,
        n_im,
        values: Vec::new(),
    };
    let values = (0..n_re * n_im)
        .into_par_iter()
        .map(|idx| sigma_min(a, field.center(idx % n_re, idx / n_re)))
        .collect::<Result<Vec<f64>>>()?;
    field.values = values;
    Ok(field)
}

/// Nearest-cell membership of `z` in the `epsilon` level set.
pub fn contains(field: &GridField, z: Complex64, epsilon: f64) -> Result<bool> {
    let (i, j) = field.cell_of(z)?;
    Ok(field.value(i, j) <= epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub index: usize,
    pub z: Complex64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub epsilon: f64,
    pub slack: f64,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest `sigma_min / epsilon` seen.
    pub max_ratio: f64,
    /// Point with the largest `sigma_min` among the failures.
    pub worst: Option<Violation>,
}

impl InclusionReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn pass_percent(&self) -> f64 {
        if self.total == 0 {
            100.0
        } else {
            100.0 * self.passed as f64 / self.total as f64
        }
    }
}

/// Checks `sigma_min(A - zI) <= epsilon (1 + slack)` for every cloud point.
pub fn cloud_inclusion_check(
    cloud: &PointCloud,
    a: &DenseMatrix,
    slack: f64,
) -> Result<InclusionReport> {
    if !(slack >= 0.0) {
        return Err(Error::InvalidArgument(format!("slack {slack} is negative")));
    }
    let bound = cloud.epsilon * (1.0 + slack);
    let sigmas = cloud
        .points
        .par_iter()
        .map(|p| sigma_min(a, p.z))
        .collect::<Result<Vec<f64>>>()?;
    let mut report = InclusionReport {
        epsilon: cloud.epsilon,
        slack,
        total: sigmas.len(),
        passed: 0,
        failed: 0,
        max_ratio: 0.0,
        worst: None,
    };
    for (index, &sigma) in sigmas.iter().enumerate() {
        report.max_ratio = report.max_ratio.max(sigma / cloud.epsilon);
        if sigma <= bound {
            report.passed += 1;
            continue;
        }
        report.failed += 1;
        if report.worst.as_ref().is_none_or(|w| sigma > w.sigma) {
            report.worst = Some(Violation {
                index,
                z: cloud.points[index].z,
                sigma,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAbscissa {
    /// Largest real part of a cell center in the level set.
    pub value: f64,
    /// Half the cell width.
    pub uncertainty: f64,
}

pub fn abscissa_grid(field: &GridField, epsilon: f64) -> Result<GridAbscissa> {
    let mut best = f64::NEG_INFINITY;
    for j in 0..field.n_im {
        for i in (0..field.n_re).rev() {
            if field.value(i, j) <= epsilon {
                best = best.max(field.center(i, j).re);
                break;
            }
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::EmptyLevelSet { epsilon });
    }
    Ok(GridAbscissa {
        value: best,
        uncertainty: 0.5 * field.cell_width(),
    })
}
