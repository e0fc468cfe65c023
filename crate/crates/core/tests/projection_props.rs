use proptest::prelude::*;
use pseudospec_core::numkernel::{Complex64, DenseMatrix};
use pseudospec_core::structures::{
    is_member, project, random_member, real_inner, StructurePattern, SymplecticJ,
};

fn matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), n * n).prop_map(move |v| {
        let entries: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        DenseMatrix::from_row_major(n, &entries).unwrap()
    })
}

fn pattern(n: usize) -> BoxedStrategy<StructurePattern> {
    let reach = n as isize - 1;
    let offsets = prop::collection::btree_set(-reach..=reach, 1..=(2 * n - 1));
    let mut options = vec![
        Just(StructurePattern::full(n).unwrap()).boxed(),
        offsets
            .clone()
            .prop_map(move |s| StructurePattern::toeplitz(n, s).unwrap())
            .boxed(),
        offsets
            .prop_map(move |s| StructurePattern::hankel(n, s).unwrap())
            .boxed(),
    ];
    if n.is_multiple_of(2) {
        options.push(Just(StructurePattern::hamiltonian(n / 2).unwrap()).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

fn case() -> impl Strategy<Value = (StructurePattern, DenseMatrix, DenseMatrix, u64)> {
    (2usize..=7).prop_flat_map(|n| (pattern(n), matrix(n), matrix(n), any::<u64>()))
}

fn dist(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_idempotent((s, m, _, _) in case()) {
        let p = project(&m, &s).unwrap();
        let pp = project(&p, &s).unwrap();
        prop_assert!(dist(&p, &pp) <= 1e-13 * m.frobenius_norm().max(1.0));
        prop_assert!(is_member(&p, &s).unwrap());
    }

    #[test]
    fn projection_is_nearest_member((s, m, _, seed) in case()) {
        let p = project(&m, &s).unwrap();
        let best = dist(&m, &p);
        let q = random_member(&s, seed).unwrap();
        for scale in [0.1, 1.0, 10.0] {
            let other = &p + &q.scale_real(scale);
            prop_assert!(best <= dist(&m, &other) * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn residual_is_orthogonal((s, m, _, seed) in case()) {
        let p = project(&m, &s).unwrap();
        let r = &m - &p;
        let q = random_member(&s, seed).unwrap();
        prop_assert!(real_inner(&r, &q).abs() <= 1e-12 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn projection_is_real_linear((s, m, n, _) in case(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let lhs = project(&(&m.scale_real(a) + &n.scale_real(b)), &s).unwrap();
        let pm = project(&m, &s).unwrap();
        let pn = project(&n, &s).unwrap();
        let rhs = &pm.scale_real(a) + &pn.scale_real(b);
        prop_assert!(dist(&lhs, &rhs) <= 1e-12 * (m.frobenius_norm() + n.frobenius_norm()));
    }

    #[test]
    fn projection_contracts((s, m, _, _) in case()) {
        let p = project(&m, &s).unwrap();
        prop_assert!(p.frobenius_norm() <= m.frobenius_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn real_input_stays_real((s, m, _, _) in case()) {
        let p = project(&m.real_part(), &s).unwrap();
        prop_assert!(p.is_real(0.0));
    }

    #[test]
    fn hamiltonian_membership_matches_qj_hermitian(n_half in 1usize..=4, seed in any::<u64>()) {
        let s = StructurePattern::hamiltonian(n_half).unwrap();
        let j = SymplecticJ { n_half }.matrix().unwrap();
        let q = random_member(&s, seed).unwrap();
        let qj = &q * &j;
        prop_assert!(dist(&qj, &qj.adjoint()) <= 1e-14);
        // Multiplying by i leaves the real-linear subspace.
        let iq = q.scale(Complex64::new(0.0, 1.0));
        prop_assert!(!is_member(&iq, &s).unwrap());
    }

    #[test]
    fn linear_patterns_are_complex_linear(
        (s, m, n, seed) in case(),
        a in (-3.0..3.0f64, -3.0..3.0f64),
        b in (-3.0..3.0f64, -3.0..3.0f64),
    ) {
        prop_assume!(s.n_half().is_none());
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let lhs = project(&(&m.scale(a) + &n.scale(b)), &s).unwrap();
        let rhs = &project(&m, &s).unwrap().scale(a) + &project(&n, &s).unwrap().scale(b);
        let scale = m.frobenius_norm() + n.frobenius_norm();
        prop_assert!(dist(&lhs, &rhs) <= 1e-13 * scale.max(1.0));
        // Complex-linear subspaces are orthogonal in the full complex inner product.
        let q = random_member(&s, seed).unwrap();
        let residual = &m - &project(&m, &s).unwrap();
        prop_assert!(residual.inner(&q).norm() <= 1e-12 * scale.max(1.0));
    }
}
