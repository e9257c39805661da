//! Hamiltonian terms of the ground-state computer and their assembly.
//!
//! Every kinetic term is a "hop" of one particle between adjacent rows,
//! `ε[n_{i-1} + n_i - (C†_i U C_{i-1} + h.c.)]`, optionally gated by
//! projectors on the positions of other particles. A two-body gate at row
//! `j` lets its control cross `j-1 -> j` only while the target waits at
//! `j-1`, lets the target cross only once the control sits at row `j`
//! (applying `X^c` for a control in column `c`, or the identity for a
//! controlled identity) and penalizes every configuration with the target
//! past the gate and the control before it. The penalty is spread evenly
//! over that region with total weight `ε`, so a configuration that other
//! gates keep from reaching the boundary is still lifted. Operators are stored in the physical frame, so the matrix is
//! real whenever every gate matrix is real.

mod sparse;

pub use sparse::*;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    enumerate_basis_with_cap, identity, not_gate, unitarity_defect, ConfigurationBasis, Gate,
    Program, Site, Unitary, DEFAULT_DIMENSION_CAP,
};

/// Relative magnitude (in units of ε) below which assembled entries are dropped.
pub const DROP_TOLERANCE: f64 = 1e-14;

/// Projector on the position of a particle other than the one hopping.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Guard {
    qubit: usize,
    row: usize,
    col: Option<u8>,
}

impl Guard {
    #[inline]
    fn holds(&self, basis: &ConfigurationBasis, index: usize) -> bool {
        let site = basis.site(index, self.qubit);
        site.row == self.row && self.col.is_none_or(|c| c == site.col)
    }
}

fn add_hop(
    out: &mut TripletBuilder,
    basis: &ConfigurationBasis,
    qubit: usize,
    row: usize,
    u: &Unitary,
    guards: &[Guard],
    weight: f64,
) {
    let w = Complex64::new(weight, 0.0);
    for index in 0..basis.dim() {
        let site = basis.site(index, qubit);
        if site.row + 1 != row && site.row != row {
            continue;
        }
        if !guards.iter().all(|g| g.holds(basis, index)) {
            continue;
        }
        out.push(index, index, w);
        if site.row + 1 == row {
            for col in 0..2u8 {
                let amp = u[col as usize][site.col as usize];
                if amp.norm() == 0.0 {
                    continue;
                }
                let to = basis.moved(index, qubit, Site::new(row, col));
                out.push(to, index, -w * amp);
            }
        }
    }
}

fn check_row(basis: &ConfigurationBasis, row: usize) -> Result<()> {
    if row == 0 || row > basis.num_steps() {
        return Err(Error::Validation(format!(
            "row {row} outside 1..={}",
            basis.num_steps()
        )));
    }
    Ok(())
}

fn check_qubit(basis: &ConfigurationBasis, qubit: usize) -> Result<()> {
    if qubit >= basis.num_qubits() {
        return Err(Error::Validation(format!(
            "qubit {qubit} outside 0..{}",
            basis.num_qubits()
        )));
    }
    Ok(())
}

/// `ε[n_{i-1} + n_i - (C†_i U C_{i-1} + h.c.)]` on qubit `a`'s chain.
pub fn single_step_term(
    basis: &ConfigurationBasis,
    qubit: usize,
    row: usize,
    u: &Unitary,
    epsilon: f64,
) -> Result<SparseHermitian> {
    check_qubit(basis, qubit)?;
    check_row(basis, row)?;
    let defect = unitarity_defect(u);
    if !(defect <= 1e-12) {
        return Err(Error::Validation(format!(
            "hop matrix is not unitary (|U^dag U - I| = {defect:.3e})"
        )));
    }
    let mut b = TripletBuilder::new(basis.dim());
    add_hop(&mut b, basis, qubit, row, u, &[], epsilon);
    Ok(b.build(DROP_TOLERANCE * epsilon))
}

/// A two-body gate reduced to what the term builder needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoBodyGate {
    pub control: usize,
    pub target: usize,
    /// `true` for CNOT, `false` for a controlled identity.
    pub flips: bool,
}

/// Term of one chain of two-body gates sharing a row. A qubit that is both
/// a target and a control within the chain crosses only when both
/// conditions hold.
pub fn two_body_chain_term(
    basis: &ConfigurationBasis,
    row: usize,
    gates: &[TwoBodyGate],
    epsilon: f64,
    penalty_scale: f64,
) -> Result<SparseHermitian> {
    check_row(basis, row)?;
    let mut qubits: Vec<usize> = Vec::new();
    for g in gates {
        check_qubit(basis, g.control)?;
        check_qubit(basis, g.target)?;
        if g.control == g.target {
            return Err(Error::Validation(format!(
                "two-body gate at row {row}: control and target are both qubit {}",
                g.control
            )));
        }
        for q in [g.control, g.target] {
            if !qubits.contains(&q) {
                qubits.push(q);
            }
        }
    }
    for q in &qubits {
        let as_control = gates.iter().filter(|g| g.control == *q).count();
        let as_target = gates.iter().filter(|g| g.target == *q).count();
        if as_control > 1 || as_target > 1 {
            return Err(Error::Validation(format!(
                "slot conflict: qubit {q} appears in more than one two-body gate role at row {row}"
            )));
        }
    }

    let mut b = TripletBuilder::new(basis.dim());
    for &q in &qubits {
        let waits: Vec<Guard> = gates
            .iter()
            .filter(|g| g.control == q)
            .map(|g| Guard {
                qubit: g.target,
                row: row - 1,
                col: None,
            })
            .collect();
        match gates.iter().find(|g| g.target == q) {
            Some(g) if g.flips => {
                for (col, u) in [(0u8, identity()), (1u8, not_gate())] {
                    let mut guards = waits.clone();
                    guards.push(Guard {
                        qubit: g.control,
                        row,
                        col: Some(col),
                    });
                    add_hop(&mut b, basis, q, row, &u, &guards, epsilon);
                }
            }
            Some(g) => {
                let mut guards = waits.clone();
                guards.push(Guard {
                    qubit: g.control,
                    row,
                    col: None,
                });
                add_hop(&mut b, basis, q, row, &identity(), &guards, epsilon);
            }
            None => add_hop(&mut b, basis, q, row, &identity(), &waits, epsilon),
        }
    }
    let n = basis.num_steps();
    let penalty = epsilon * penalty_scale / (row * (n + 1 - row)) as f64;
    for g in gates {
        for index in 0..basis.dim() {
            if basis.row(index, g.control) < row && basis.row(index, g.target) >= row {
                b.push_real(index, index, penalty);
            }
        }
    }
    Ok(b.build(DROP_TOLERANCE * epsilon))
}

/// Controlled-NOT of `target` by `control` at step `row`.
pub fn cnot_term(
    basis: &ConfigurationBasis,
    control: usize,
    target: usize,
    row: usize,
    epsilon: f64,
) -> Result<SparseHermitian> {
    let gate = TwoBodyGate {
        control,
        target,
        flips: true,
    };
    two_body_chain_term(basis, row, &[gate], epsilon, 1.0)
}

/// Controlled identity: the same synchronization as [`cnot_term`] with the
/// identity on both branches.
pub fn cid_term(
    basis: &ConfigurationBasis,
    control: usize,
    target: usize,
    row: usize,
    epsilon: f64,
) -> Result<SparseHermitian> {
    let gate = TwoBodyGate {
        control,
        target,
        flips: false,
    };
    two_body_chain_term(basis, row, &[gate], epsilon, 1.0)
}

/// `λ n_{a, row 0, column 1-v}`: selects input `v` on qubit `a`.
pub fn pin_term(
    basis: &ConfigurationBasis,
    qubit: usize,
    bit: u8,
    lambda: f64,
) -> Result<SparseHermitian> {
    check_qubit(basis, qubit)?;
    if bit > 1 {
        return Err(Error::Validation(format!("pin bit must be 0 or 1, got {bit}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Validation(format!("pin strength must be positive, got {lambda}")));
    }
    let mut b = TripletBuilder::new(basis.dim());
    let wrong = Site::new(0, 1 - bit);
    for index in 0..basis.dim() {
        if basis.site(index, qubit) == wrong {
            b.push_real(index, index, lambda);
        }
    }
    Ok(b.build(0.0))
}

/// `V Σ_σ n_{a,N,σ} n_{r,σ}`: readout particle `r` is repelled from the
/// column its qubit occupies at the final row.
pub fn readout_term(
    basis: &ConfigurationBasis,
    qubit: usize,
    particle: usize,
    coupling: f64,
) -> Result<SparseHermitian> {
    check_qubit(basis, qubit)?;
    if particle >= basis.num_readout() {
        return Err(Error::Validation(format!(
            "readout particle {particle} outside 0..{}",
            basis.num_readout()
        )));
    }
    if !(coupling > 0.0) {
        return Err(Error::Validation(format!(
            "readout coupling must be positive, got {coupling}"
        )));
    }
    let n = basis.num_steps();
    let mut b = TripletBuilder::new(basis.dim());
    for index in 0..basis.dim() {
        let site = basis.site(index, qubit);
        if site.row == n && basis.readout_position(index, particle) == site.col {
            b.push_real(index, index, coupling);
        }
    }
    Ok(b.build(0.0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermLabel {
    SingleStep { qubit: usize, row: usize },
    /// Indices into the program's gate list, control-first.
    TwoBody { row: usize, gates: Vec<usize> },
    Pin { qubit: usize },
    Readout { qubit: usize, particle: usize },
    /// Configurations no sequence of hops reaches from row 0.
    Unreachable,
}

impl std::fmt::Display for TermLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TermLabel::SingleStep { qubit, row } => write!(f, "h[{row}]_{qubit}"),
            TermLabel::TwoBody { row, gates } => write!(f, "two-body[{row}] gates {gates:?}"),
            TermLabel::Pin { qubit } => write!(f, "pin_{qubit}"),
            TermLabel::Readout { qubit, particle } => write!(f, "readout_{particle}(q{qubit})"),
            TermLabel::Unreachable => write!(f, "unreachable"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub label: TermLabel,
    /// Qubits whose creation/annihilation operators the term contains.
    pub support: Vec<usize>,
    pub op: SparseHermitian,
}

/// Labeled addends of a Hamiltonian over one basis.
#[derive(Clone, Debug)]
pub struct TermSet {
    pub basis: ConfigurationBasis,
    pub epsilon: f64,
    pub terms: Vec<Term>,
}

impl TermSet {
    /// Entrywise sum of all terms, accumulated in term order.
    pub fn sum(&self) -> SparseHermitian {
        let mut b = TripletBuilder::new(self.basis.dim());
        for t in &self.terms {
            b.extend_from(&t.op);
        }
        b.build(DROP_TOLERANCE * self.epsilon)
    }

    /// Sum of the terms selected by `keep`.
    pub fn partial_sum(&self, keep: impl Fn(&Term) -> bool) -> SparseHermitian {
        let mut b = TripletBuilder::new(self.basis.dim());
        for t in self.terms.iter().filter(|t| keep(t)) {
            b.extend_from(&t.op);
        }
        b.build(DROP_TOLERANCE * self.epsilon)
    }

    pub fn find(&self, label: &TermLabel) -> Option<&Term> {
        self.terms.iter().find(|t| &t.label == label)
    }
}

/// Scales every final-row creation and annihilation operator by `beta`.
///
/// An entry `<x|T|y>` of a term picks up one factor of `beta` for each
/// supported qubit sitting at row N in `x` and one for each in `y`.
pub fn apply_tipping(terms: &TermSet, beta: f64) -> Result<TermSet> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("tipping beta must lie in (0, 1], got {beta}")));
    }
    if beta == 1.0 {
        return Ok(terms.clone());
    }
    let basis = &terms.basis;
    let n = basis.num_steps();
    let tipped = terms
        .terms
        .par_iter()
        .map(|t| {
            let count = |index: usize| t.support.iter().filter(|&&q| basis.row(index, q) == n).count();
            let op = t.op.map_entries(|r, c| beta.powi((count(r) + count(c)) as i32));
            Term {
                label: t.label.clone(),
                support: t.support.clone(),
                op,
            }
        })
        .collect();
    Ok(TermSet {
        basis: basis.clone(),
        epsilon: terms.epsilon,
        terms: tipped,
    })
}

#[derive(Clone, Debug)]
pub struct AssembleOptions {
    pub dimension_cap: usize,
    /// Multiplier on the two-body penalty. Anything other than 1
    /// breaks the construction; it exists so verification can inject a fault.
    pub two_body_penalty_scale: f64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            dimension_cap: DEFAULT_DIMENSION_CAP,
            two_body_penalty_scale: 1.0,
        }
    }
}

enum Plan {
    Single { qubit: usize, row: usize, u: Unitary },
    Chain { row: usize, gates: Vec<usize> },
    Pin { qubit: usize, bit: u8, lambda: f64 },
    Readout { qubit: usize, particle: usize },
}

pub fn assemble(program: &Program) -> Result<(TermSet, SparseHermitian)> {
    assemble_with(program, &AssembleOptions::default())
}

/// Builds every term of `program` and their sum. Rows without a two-body
/// gate get single-step terms (identity where no gate is placed); tipping
/// is applied last.
pub fn assemble_with(
    program: &Program,
    opts: &AssembleOptions,
) -> Result<(TermSet, SparseHermitian)> {
    let basis = enumerate_basis_with_cap(program, opts.dimension_cap)?;
    let eps = program.epsilon;

    let mut plans = Vec::new();
    for row in 1..=program.num_steps {
        let roles = program.roles_at(row);
        for (qubit, role) in roles.iter().enumerate() {
            if role.control_of.is_none() && role.target_of.is_none() {
                let u = program.single_at(qubit, row).copied().unwrap_or_else(identity);
                plans.push(Plan::Single { qubit, row, u });
            }
        }
        for gates in program.two_body_chains(row) {
            plans.push(Plan::Chain { row, gates });
        }
    }
    for pin in &program.pins {
        plans.push(Plan::Pin {
            qubit: pin.qubit,
            bit: pin.bit,
            lambda: program.pin_strength(pin),
        });
    }
    for (particle, &qubit) in program.readout.iter().enumerate() {
        plans.push(Plan::Readout { qubit, particle });
    }

    let terms = plans
        .par_iter()
        .map(|plan| -> Result<Term> {
            Ok(match plan {
                Plan::Single { qubit, row, u } => Term {
                    label: TermLabel::SingleStep {
                        qubit: *qubit,
                        row: *row,
                    },
                    support: vec![*qubit],
                    op: single_step_term(&basis, *qubit, *row, u, eps)?,
                },
                Plan::Chain { row, gates } => {
                    let specs: Vec<TwoBodyGate> = gates
                        .iter()
                        .map(|&i| {
                            let (control, target) = program.gates[i].pair().unwrap();
                            TwoBodyGate {
                                control,
                                target,
                                flips: matches!(program.gates[i], Gate::Cnot { .. }),
                            }
                        })
                        .collect();
                    let mut support = Vec::new();
                    for g in &specs {
                        for q in [g.control, g.target] {
                            if !support.contains(&q) {
                                support.push(q);
                            }
                        }
                    }
                    Term {
                        label: TermLabel::TwoBody {
                            row: *row,
                            gates: gates.clone(),
                        },
                        support,
                        op: two_body_chain_term(
                            &basis,
                            *row,
                            &specs,
                            eps,
                            opts.two_body_penalty_scale,
                        )?,
                    }
                }
                Plan::Pin { qubit, bit, lambda } => Term {
                    label: TermLabel::Pin { qubit: *qubit },
                    support: vec![*qubit],
                    op: pin_term(&basis, *qubit, *bit, *lambda)?,
                },
                Plan::Readout { qubit, particle } => Term {
                    label: TermLabel::Readout {
                        qubit: *qubit,
                        particle: *particle,
                    },
                    support: vec![*qubit],
                    op: readout_term(&basis, *qubit, *particle, program.readout_strength())?,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut terms = terms;
    if let Some(term) = unreachable_term(&basis, program, &terms) {
        terms.push(term);
    }
    let mut set = TermSet {
        basis,
        epsilon: eps,
        terms,
    };
    if let Some(beta) = program.tip_beta {
        set = apply_tipping(&set, beta)?;
    }
    let h = set.sum();
    Ok((set, h))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// `ε` on every configuration that the kinetic terms never connect to an
/// all-at-row-0 configuration and that no gate penalty already lifts.
///
/// Two gates on the same pair of qubits (or a ring of waiting qubits) can
/// strand configurations whose every exit is guarded by a row condition
/// that cannot hold; without this term each would be a spurious zero mode.
/// For a single gate the set is empty.
fn unreachable_term(basis: &ConfigurationBasis, program: &Program, terms: &[Term]) -> Option<Term> {
    if !program.has_two_body() {
        return None;
    }
    let dim = basis.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    for t in terms {
        if !matches!(t.label, TermLabel::SingleStep { .. } | TermLabel::TwoBody { .. }) {
            continue;
        }
        for (r, c, v) in t.op.entries() {
            if r != c && v.norm() > 0.0 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut seeded = vec![false; dim];
    for logical in 0..1usize << basis.num_qubits() {
        for readout in 0..1usize << basis.num_readout() {
            let root = find(&mut parent, basis.row_index(0, logical, readout));
            seeded[root] = true;
        }
    }
    let gates: Vec<(usize, usize, usize)> = program
        .two_body_gates()
        .map(|(_, g)| {
            let (c, t) = g.pair().unwrap();
            (c, t, g.row())
        })
        .collect();
    let mut b = TripletBuilder::new(dim);
    for index in 0..dim {
        if seeded[find(&mut parent, index)] {
            continue;
        }
        let lifted = gates
            .iter()
            .any(|&(c, t, j)| basis.row(index, c) < j && basis.row(index, t) >= j);
        if !lifted {
            b.push_real(index, index, program.epsilon);
        }
    }
    let op = b.build(0.0);
    (op.nnz() > 0).then(|| Term {
        label: TermLabel::Unreachable,
        support: (0..basis.num_qubits()).collect(),
        op,
    })
}
