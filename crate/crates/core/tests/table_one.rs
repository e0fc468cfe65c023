//! Reconstruction of the published five-by-five tridiagonal Toeplitz example.
//!
//! The eigenvalues fix the diagonal `d` and `s = sqrt(sub * sup)`; the middle
//! condition number fixes `r = sqrt(sub / sup)`. The remaining published
//! condition numbers are then predictions.

use pseudospec_core::numkernel::{eig_pairs, tridiag_toeplitz, Complex64};
use pseudospec_core::sensitivity::{analyze, cond_standard_all, cond_structured_all};
use pseudospec_core::structures::StructurePattern;

const EIGENVALUES: [f64; 5] = [-0.4988, 0.0564, 0.8147, 1.5731, 2.1283];
const KAPPA: [f64; 5] = [1.153e2, 3.269e2, 4.243e2, 3.269e2, 1.153e2];
const KAPPA_T: [f64; 5] = [2.625, 1.559, 4.472e-1, 1.559, 2.625];

/// Condition number of the middle eigenvalue as a function of `r`, from the
/// closed-form eigenvectors `x_j = r^j sin(j pi / 2)`, `y_j = r^-j sin(j pi / 2)`.
fn middle_kappa(r: f64) -> f64 {
    let (mut xx, mut yy, mut yx) = (0.0, 0.0, 0.0);
    for j in 1..=5 {
        let s = (j as f64 * std::f64::consts::FRAC_PI_2).sin();
        let x = r.powi(j) * s;
        let y = r.powi(-j) * s;
        xx += x * x;
        yy += y * y;
        yx += x * y;
    }
    (xx * yy).sqrt() / yx.abs()
}

fn solve_ratio(target: f64) -> f64 {
    let (mut lo, mut hi) = (1.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if middle_kappa(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn published_matrix() -> pseudospec_core::numkernel::DenseMatrix {
    let d = EIGENVALUES[2];
    let s = EIGENVALUES[3] - EIGENVALUES[2];
    let r = solve_ratio(KAPPA[2]);
    let c = |v: f64| Complex64::new(v, 0.0);
    tridiag_toeplitz(5, c(s * r), c(d), c(s / r)).unwrap()
}

#[test]
fn reconstructed_matrix_reproduces_table() {
    let a = published_matrix();
    let sys = eig_pairs(&a).unwrap();
    let pattern = StructurePattern::toeplitz(5, [-1, 0, 1]).unwrap().with_real(true);
    let k = cond_standard_all(&sys).unwrap();
    let kt = cond_structured_all(&sys, &pattern).unwrap();
    for i in 0..5 {
        // Four published significant digits.
        assert!((sys.eigenvalue(i).re - EIGENVALUES[i]).abs() < 2e-4);
        assert!((k[i] - KAPPA[i]).abs() < 1e-3 * KAPPA[i], "kappa {i}: {}", k[i]);
        assert!((kt[i] - KAPPA_T[i]).abs() < 1e-3 * KAPPA_T[i], "kappa_T {i}: {}", kt[i]);
    }
    // The middle structured value is exactly 1/sqrt(5) for every ratio.
    assert!((kt[2] - 0.2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn reconstructed_matrix_estimates_and_pairs() {
    let a = published_matrix();
    let sys = eig_pairs(&a).unwrap();
    let pattern = StructurePattern::toeplitz(5, [-1, 0, 1]).unwrap().with_real(true);
    let report = analyze(&sys, &pattern).unwrap();
    // Published: pair (2, 3) at 10^-3.2 and pair (1, 2) at 10^-0.8, one-based.
    assert_eq!(report.pair, (1, 2));
    assert_eq!(report.pair_structured, (0, 1));
    assert!((report.epsilon.log10() + 3.2).abs() < 0.5);
    assert!((report.epsilon_structured.log10() + 0.8).abs() < 0.5);
}
