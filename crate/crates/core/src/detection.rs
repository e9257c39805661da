//! Detecting the finished computation: final-row probabilities, tipping,
//! readout particles and controlled-identity synchronization.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ConfigurationBasis, Gate, Program};

/// Readout occupations at or beyond these bounds count as localized.
pub const READOUT_LOW: f64 = 0.1;
pub const READOUT_HIGH: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionReport {
    pub beta: f64,
    /// Probability that every qubit sits at the final row.
    pub p_all_final: f64,
    pub per_qubit_final: Vec<f64>,
    /// `(1 + β²N)^-M`, exact for gate-free programs.
    pub predicted: f64,
    /// `<n_left>` of each readout particle.
    pub readout_left: Vec<f64>,
    /// `P(all final | last qubit final)`.
    pub cid_conditional: Option<f64>,
}

pub fn predicted_probability(num_qubits: usize, num_steps: usize, beta: f64) -> f64 {
    (1.0 + beta * beta * num_steps as f64).powi(-(num_qubits as i32))
}

/// Final-row statistics of a normalized state; readout positions are
/// marginalized.
pub fn detection_probability(
    psi: &[Complex64],
    basis: &ConfigurationBasis,
    program: &Program,
) -> DetectionReport {
    let m = basis.num_qubits();
    let n = basis.num_steps();
    let r = basis.num_readout();
    let mut all = 0.0;
    let mut last = 0.0;
    let mut per_qubit = vec![0.0; m];
    let mut left = vec![0.0; r];
    let mut total = 0.0;
    for (index, z) in psi.iter().enumerate() {
        let p = z.norm_sqr();
        if p == 0.0 {
            continue;
        }
        total += p;
        let mut every = true;
        for (a, slot) in per_qubit.iter_mut().enumerate() {
            if basis.row(index, a) == n {
                *slot += p;
            } else {
                every = false;
            }
        }
        if every {
            all += p;
        }
        if basis.row(index, m - 1) == n {
            last += p;
        }
        for (ro, slot) in left.iter_mut().enumerate() {
            if basis.readout_position(index, ro) == 0 {
                *slot += p;
            }
        }
    }
    let norm = |x: f64| if total > 0.0 { x / total } else { 0.0 };
    let beta = program.beta();
    let has_cid = program.gates.iter().any(|g| matches!(g, Gate::Cid { .. }));
    DetectionReport {
        beta,
        p_all_final: norm(all),
        per_qubit_final: per_qubit.into_iter().map(norm).collect(),
        predicted: predicted_probability(m, n, beta),
        readout_left: left.into_iter().map(norm).collect(),
        cid_conditional: (has_cid && last > 0.0).then(|| all / last),
    }
}

/// `1/sqrt(MN)`: keeps `(1 + β²N)^-M = (1 + 1/M)^-M` of order one.
pub fn choose_beta(num_qubits: usize, num_steps: usize) -> Result<f64> {
    if num_qubits == 0 || num_steps == 0 {
        return Err(Error::Domain("choose_beta needs M, N >= 1".into()));
    }
    Ok(1.0 / ((num_qubits * num_steps) as f64).sqrt())
}

/// Gives every qubit a readout particle with repulsion `coupling`.
pub fn attach_readout(program: &Program, coupling: f64) -> Result<Program> {
    if !(coupling > 0.0) {
        return Err(Error::Validation(format!(
            "readout coupling must be positive, got {coupling}"
        )));
    }
    let mut p = program.clone();
    p.readout = (0..program.num_qubits).collect();
    p.readout_coupling = Some(coupling);
    p.validate()?;
    Ok(p)
}

/// Output bits read off the readout particles of a ground state.
///
/// A readout particle sits opposite its qubit's final column, so bit `a` is
/// 1 when particle `a` is on the left. A ground energy above `energy_tol`
/// means no readout configuration is compatible with the output, which
/// happens exactly when the output does not factor.
pub fn infer_output_from_readout(
    psi: &[Complex64],
    ground_energy: f64,
    basis: &ConfigurationBasis,
    program: &Program,
    energy_tol: f64,
) -> Result<Vec<u8>> {
    if program.readout.len() != program.num_qubits {
        return Err(Error::Validation(
            "readout inference needs a readout particle on every qubit".into(),
        ));
    }
    if ground_energy > energy_tol {
        return Err(Error::NonFactoringOutput {
            qubit: 0,
            reason: format!(
                "ground energy {ground_energy:.3e} is positive, so no readout configuration fits the output"
            ),
        });
    }
    let report = detection_probability(psi, basis, program);
    let mut bits = vec![0u8; program.num_qubits];
    for (particle, &qubit) in program.readout.iter().enumerate() {
        let left = report.readout_left[particle];
        bits[qubit] = if left >= READOUT_HIGH {
            1
        } else if left <= READOUT_LOW {
            0
        } else {
            return Err(Error::NonFactoringOutput {
                qubit,
                reason: format!("readout left occupation {left:.4} is not localized"),
            });
        };
    }
    Ok(bits)
}

/// Adds controlled identities at the final row so that qubit `k + 1` can
/// only enter it once qubit `k` has.
pub fn cid_chain(program: &Program) -> Result<Program> {
    let n = program.num_steps;
    if program.gates.iter().any(|g| g.row() == n) {
        return Err(Error::Validation(format!(
            "the final row {n} must be free of gates to add a synchronization chain"
        )));
    }
    let mut p = program.clone();
    for k in 0..program.num_qubits.saturating_sub(1) {
        p = p.cid(k, k + 1, n);
    }
    p.validate()?;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncReport {
    /// `P(all final | last qubit final)`.
    pub conditional: f64,
    pub p_all_final: f64,
    pub p_last_final: f64,
}

pub fn cid_sync_check(psi: &[Complex64], basis: &ConfigurationBasis) -> Result<SyncReport> {
    let m = basis.num_qubits();
    let n = basis.num_steps();
    let (mut all, mut last, mut total) = (0.0, 0.0, 0.0);
    for (index, z) in psi.iter().enumerate() {
        let p = z.norm_sqr();
        total += p;
        if basis.row(index, m - 1) == n {
            last += p;
            if (0..m).all(|a| basis.row(index, a) == n) {
                all += p;
            }
        }
    }
    if !(last > 0.0) {
        return Err(Error::Numerical(
            "last qubit never reaches the final row".into(),
        ));
    }
    Ok(SyncReport {
        conditional: all / last,
        p_all_final: all / total,
        p_last_final: last / total,
    })
}
