//! Reading computations out of ground states.
//!
//! A zero-energy state develops like the circuit: the block of amplitudes
//! with every qubit at row `j` equals the first `j` steps of the circuit
//! applied to the row-0 block. This module checks that and extracts the
//! final-row output, with a plain state-vector simulator as the reference.

use num_complex::Complex64;
use serde::Serialize;

use crate::detection::{detection_probability, DetectionReport};
use crate::eigensolve::{solve_with_gap, Method, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::assemble;
use crate::lattice::{ConfigurationBasis, Gate, Program};

/// Tolerance on the development residual of [`run_program`].
pub const RUN_RESIDUAL_TOL: f64 = 1e-6;

/// Amplitudes of the configurations with every qubit at one row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowProjection {
    pub row: usize,
    /// Indexed by `(logical << R) | readout`, qubit 0 the most significant
    /// logical bit.
    pub amplitudes: Vec<Complex64>,
    pub num_readout: usize,
    pub norm: f64,
}

impl RowProjection {
    /// The `2^M` logical amplitudes for one readout configuration.
    pub fn readout_block(&self, readout: usize) -> Vec<Complex64> {
        let r = self.num_readout;
        (0..self.amplitudes.len() >> r)
            .map(|logical| self.amplitudes[(logical << r) | readout])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogicalState {
    pub num_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl LogicalState {
    /// Normalizes `amplitudes` and rotates the global phase so the largest
    /// amplitude is real and positive.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::Domain(format!(
                "{} amplitudes for {num_qubits} qubits",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Numerical("logical state has zero norm".into()));
        }
        let lead = amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        let phase = lead.conj() / lead.norm();
        let amplitudes = amplitudes.into_iter().map(|z| z * phase / norm).collect();
        Ok(LogicalState {
            num_qubits,
            amplitudes,
        })
    }

    pub fn basis_state(num_qubits: usize, bits: &[u8]) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[bits_to_index(bits)] = Complex64::new(1.0, 0.0);
        LogicalState {
            num_qubits,
            amplitudes,
        }
    }

    /// `|<self|other>|²`.
    pub fn fidelity(&self, other: &LogicalState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Bitstring of a logical index, qubit 0 first.
    pub fn label(&self, index: usize) -> String {
        (0..self.num_qubits)
            .map(|a| {
                if (index >> (self.num_qubits - 1 - a)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    /// Nonzero amplitudes (above `threshold` in magnitude) with their bitstrings.
    pub fn support(&self, threshold: f64) -> Vec<(String, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > threshold)
            .map(|(i, z)| (self.label(i), *z))
            .collect()
    }
}

pub fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn row_projection(psi: &[Complex64], row: usize, basis: &ConfigurationBasis) -> RowProjection {
    let m = basis.num_qubits();
    let r = basis.num_readout();
    let mut amplitudes = Vec::with_capacity(1 << (m + r));
    for logical in 0..1usize << m {
        for readout in 0..1usize << r {
            amplitudes.push(psi[basis.row_index(row, logical, readout)]);
        }
    }
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    RowProjection {
        row,
        amplitudes,
        num_readout: r,
        norm,
    }
}

fn apply_single(state: &mut [Complex64], m: usize, qubit: usize, u: &[[Complex64; 2]; 2]) {
    let bit = 1 << (m - 1 - qubit);
    for i in 0..state.len() {
        if i & bit == 0 {
            let (a0, a1) = (state[i], state[i | bit]);
            state[i] = u[0][0] * a0 + u[0][1] * a1;
            state[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

fn apply_cnot(state: &mut [Complex64], m: usize, control: usize, target: usize) {
    let (cb, tb) = (1 << (m - 1 - control), 1 << (m - 1 - target));
    for i in 0..state.len() {
        if i & cb != 0 && i & tb == 0 {
            state.swap(i, i | tb);
        }
    }
}

/// Applies step `row` of the program (rows are 1-based).
pub fn apply_step(program: &Program, row: usize, state: &mut [Complex64]) {
    let m = program.num_qubits;
    for gate in &program.gates {
        if let Gate::Single {
            qubit,
            row: r,
            matrix,
        } = gate
        {
            if *r == row {
                apply_single(state, m, *qubit, matrix);
            }
        }
    }
    for chain in program.two_body_chains(row) {
        for idx in chain {
            if let Gate::Cnot {
                control, target, ..
            } = program.gates[idx]
            {
                apply_cnot(state, m, control, target);
            }
        }
    }
}

/// State-vector simulation of the program on a computational-basis input.
pub fn reference_circuit(program: &Program, input: &[u8]) -> Result<LogicalState> {
    program.validate()?;
    if input.len() != program.num_qubits || input.iter().any(|&b| b > 1) {
        return Err(Error::Validation(format!(
            "input must be {} bits of 0/1",
            program.num_qubits
        )));
    }
    let mut state = LogicalState::basis_state(program.num_qubits, input).amplitudes;
    for row in 1..=program.num_steps {
        apply_step(program, row, &mut state);
    }
    Ok(LogicalState {
        num_qubits: program.num_qubits,
        amplitudes: state,
    })
}

/// Largest relative deviation, over rows, of the all-at-row-`j` block from
/// the circuit applied to the row-0 block. The final row is first rescaled
/// by `β^M` to undo tipping.
pub fn verify_development(
    psi: &[Complex64],
    program: &Program,
    basis: &ConfigurationBasis,
) -> Result<f64> {
    let m = basis.num_qubits();
    let r = basis.num_readout();
    let p0 = row_projection(psi, 0, basis);
    if p0.norm < 1e-12 {
        return Err(Error::IndeterminateInput { norm: p0.norm });
    }
    let mut evolved: Vec<Vec<Complex64>> = (0..1 << r).map(|ro| p0.readout_block(ro)).collect();
    let beta_m = program.beta().powi(m as i32);
    let mut worst: f64 = 0.0;
    for row in 1..=program.num_steps {
        for block in evolved.iter_mut() {
            apply_step(program, row, block);
        }
        let pj = row_projection(psi, row, basis);
        let scale = if row == program.num_steps { beta_m } else { 1.0 };
        let mut sq = 0.0;
        for (ro, want) in evolved.iter().enumerate() {
            for (got, w) in pj.readout_block(ro).iter().zip(want) {
                sq += (got * scale - w).norm_sqr();
            }
        }
        worst = worst.max(sq.sqrt() / p0.norm);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunDiagnostics {
    pub ground_energy: f64,
    pub gap: Option<f64>,
    pub residual: f64,
    pub fidelity: f64,
    pub matvecs: usize,
    pub method: Method,
    pub dimension: usize,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub input: Vec<u8>,
    pub output: LogicalState,
    pub reference: LogicalState,
    pub detection: DetectionReport,
    pub diagnostics: RunDiagnostics,
}

pub fn run_program(program: &Program) -> Result<RunResult> {
    run_program_with(program, &SolverOptions::for_epsilon(program.epsilon))
}

/// Solves for the (unique, pinned) ground state, checks that it develops
/// like the circuit and returns the final-row logical state.
pub fn run_program_with(program: &Program, opts: &SolverOptions) -> Result<RunResult> {
    program.validate()?;
    let input = program.pinned_input().ok_or_else(|| {
        Error::Validation("run needs every qubit pinned to an input bit".into())
    })?;
    let (set, h) = assemble(program)?;
    let basis = set.basis;
    let mut o = opts.clone();
    o.k = o.k.max(2);
    let spectrum = solve_with_gap(&h, &o)?;
    let psi = spectrum.ground_state();
    let residual = verify_development(psi, program, &basis)?;
    if !(residual <= RUN_RESIDUAL_TOL) {
        return Err(Error::Consistency {
            residual,
            tolerance: RUN_RESIDUAL_TOL,
        });
    }
    let last = row_projection(psi, program.num_steps, &basis);
    let block = (0..1usize << basis.num_readout())
        .map(|ro| last.readout_block(ro))
        .max_by(|a, b| {
            let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            na.total_cmp(&nb)
        })
        .unwrap();
    let output = LogicalState::from_amplitudes(program.num_qubits, block)?;
    let reference = reference_circuit(program, &input)?;
    let fidelity = output.fidelity(&reference);
    let detection = detection_probability(psi, &basis, program);
    Ok(RunResult {
        input,
        output,
        reference,
        detection,
        diagnostics: RunDiagnostics {
            ground_energy: spectrum.ground_energy(),
            gap: spectrum.gap,
            residual,
            fidelity,
            matvecs: spectrum.matvecs,
            method: spectrum.method,
            dimension: basis.dim(),
        },
    })
}
