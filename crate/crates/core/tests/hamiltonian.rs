use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gsqc::eigensolve::dense_spectrum;
use gsqc::generate::{random_input, random_program, RandomSpec};
use gsqc::hamiltonian::{assemble, SparseHermitian, DROP_TOLERANCE};
use gsqc::lattice::{rotation, Program};

fn program(seed: u64, m: usize, n: usize, complex: bool) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_program(
        &mut rng,
        &RandomSpec {
            num_qubits: m,
            num_steps: n,
            max_cnots: 3,
            single_density: 0.5,
            complex,
        },
    )
}

fn small() -> impl Strategy<Value = (u64, usize, usize, bool)> {
    (any::<u64>(), 1usize..=3, 1usize..=4, any::<bool>())
        .prop_filter("dense-sized", |(_, m, n, _)| *m < 3 || *n <= 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hermitian_and_positive((seed, m, n, complex) in small()) {
        let p = program(seed, m, n, complex);
        let (set, h) = assemble(&p).unwrap();
        let d = h.to_dense();
        prop_assert!((&d - d.adjoint()).iter().all(|z| z.norm() < 1e-14));
        let s = dense_spectrum(&h).unwrap();
        prop_assert!(s.eigenvalues[0] > -1e-10);
        prop_assert!(h.max_abs_diff(&set.sum()) < 1e-13);
        if !complex {
            prop_assert!(h.is_real());
        }
    }

    #[test]
    fn unpinned_ground_manifold_has_2_pow_m((seed, m, n, complex) in small()) {
        let p = program(seed, m, n, complex);
        let (_, h) = assemble(&p).unwrap();
        let s = dense_spectrum(&h).unwrap();
        prop_assert_eq!(s.ground_manifold_dim, 1 << m, "{:?}", &s.eigenvalues[..(1 << m) + 1]);
        prop_assert!(s.eigenvalues[0].abs() < 1e-8);
        prop_assert!(s.gap.unwrap() > 1e-6);
    }

    #[test]
    fn pinned_ground_state_is_unique((seed, m, n, complex) in small()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
        let p = program(seed, m, n, complex).pin_all(&random_input(&mut rng, m));
        let (_, h) = assemble(&p).unwrap();
        let s = dense_spectrum(&h).unwrap();
        prop_assert_eq!(s.ground_manifold_dim, 1);
        prop_assert!(s.eigenvalues[0].abs() < 1e-8);
    }

    #[test]
    fn tipping_keeps_zero_modes((seed, m, n, _c) in small(), beta in 0.1f64..1.0) {
        let p = program(seed, m, n, false).tipped(beta);
        let (_, h) = assemble(&p).unwrap();
        let s = dense_spectrum(&h).unwrap();
        prop_assert_eq!(s.ground_manifold_dim, 1 << m);
        prop_assert!(s.eigenvalues[0].abs() < 1e-8);
    }

    #[test]
    fn coordinate_round_trip((seed, m, n, complex) in small()) {
        let (_, h) = assemble(&program(seed, m, n, complex)).unwrap();
        let mut buf = Vec::new();
        h.write_coordinate(&mut buf).unwrap();
        let back = SparseHermitian::read_coordinate(buf.as_slice()).unwrap();
        prop_assert_eq!(back.dim(), h.dim());
        prop_assert!(back.max_abs_diff(&h) <= DROP_TOLERANCE);
    }

    #[test]
    fn single_qubit_gates_are_gauge(n in 1usize..=6, angles in prop::collection::vec(-3.2f64..3.2, 6)) {
        let plain = Program::new(1, n);
        let gated = (1..=n).fold(plain.clone(), |p, row| p.single(0, row, rotation(angles[row - 1])));
        let a = dense_spectrum(&assemble(&plain).unwrap().1).unwrap();
        let b = dense_spectrum(&assemble(&gated).unwrap().1).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn two_qubit_gauge_with_disjoint_singles() {
    // singles on a qubit that takes part in no two-body gate are pure gauge
    let base = Program::new(3, 3).cnot(0, 1, 2);
    let gated = base
        .clone()
        .single(2, 1, rotation(0.3))
        .single(2, 2, rotation(-1.2))
        .single(2, 3, rotation(2.0));
    let a = dense_spectrum(&assemble(&base).unwrap().1).unwrap();
    let b = dense_spectrum(&assemble(&gated).unwrap().1).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn dimension_formula() {
    for (m, n, d) in [(1, 1, 4), (2, 2, 36), (3, 4, 1000), (2, 10, 484)] {
        let (set, h) = assemble(&Program::new(m, n)).unwrap();
        assert_eq!(set.basis.dim(), d);
        assert_eq!(h.dim(), d);
    }
    let p = Program::new(2, 2).with_readout(&[0, 1]);
    assert_eq!(assemble(&p).unwrap().1.dim(), 36 * 4);
}
