//! Random programs for property suites.

use rand::Rng;

use crate::lattice::{rotation, Program, Unitary};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    pub num_qubits: usize,
    pub num_steps: usize,
    /// Upper limit on CNOT gates; placements that break the slot rules are skipped.
    pub max_cnots: usize,
    /// Chance that a free `(qubit, row)` slot gets a single-qubit gate.
    pub single_density: f64,
    /// Use complex unitaries instead of real rotations.
    pub complex: bool,
}

fn random_unitary(rng: &mut impl Rng, complex: bool) -> Unitary {
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    if !complex {
        return rotation(theta);
    }
    let (a, b, c) = (
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let (cos, sin) = (theta.cos(), theta.sin());
    let e = |phi: f64| Complex64::from_polar(1.0, phi);
    [
        [e(a) * cos, -e(a + c - b) * sin],
        [e(b) * sin, e(c) * cos],
    ]
}

/// A valid program with up to `max_cnots` CNOTs and random single-qubit gates.
pub fn random_program(rng: &mut impl Rng, spec: &RandomSpec) -> Program {
    let (m, n) = (spec.num_qubits, spec.num_steps);
    let mut p = Program::new(m, n);
    if m >= 2 {
        let count = rng.random_range(0..=spec.max_cnots);
        for _ in 0..count {
            let control = rng.random_range(0..m);
            let target = (control + rng.random_range(1..m)) % m;
            let row = rng.random_range(1..=n);
            let candidate = p.clone().cnot(control, target, row);
            if candidate.validate().is_ok() {
                p = candidate;
            }
        }
    }
    for qubit in 0..m {
        for row in 1..=n {
            if rng.random_bool(spec.single_density) {
                let candidate = p.clone().single(qubit, row, random_unitary(rng, spec.complex));
                if candidate.validate().is_ok() {
                    p = candidate;
                }
            }
        }
    }
    p
}

pub fn random_input(rng: &mut impl Rng, num_qubits: usize) -> Vec<u8> {
    (0..num_qubits).map(|_| rng.random_range(0..2u8)).collect()
}
