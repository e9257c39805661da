//! Program model and its JSON file format.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2×2 single-qubit unitary, indexed `[out][in]`.
pub type Unitary = [[Complex64; 2]; 2];

const UNITARITY_TOL: f64 = 1e-12;

pub fn identity() -> Unitary {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[o, z], [z, o]]
}

pub fn not_gate() -> Unitary {
    let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[z, o], [o, z]]
}

/// Real rotation `[[cos t, -sin t], [sin t, cos t]]`.
pub fn rotation(theta: f64) -> Unitary {
    let (c, s) = (theta.cos(), theta.sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn hadamard() -> Unitary {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
    ]
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &Unitary) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let acc: Complex64 = u.iter().map(|row| row[i].conj() * row[j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).norm());
        }
    }
    worst
}

pub fn is_real_unitary(u: &Unitary) -> bool {
    u.iter().flatten().all(|z| z.im == 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Single,
    Cnot,
    Cid,
}

/// One gate of a program, placed at step `row` (1..=N).
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Single {
        qubit: usize,
        row: usize,
        matrix: Unitary,
    },
    Cnot {
        control: usize,
        target: usize,
        row: usize,
    },
    /// Controlled identity: synchronizes the target behind the control
    /// without acting on its logical state.
    Cid {
        control: usize,
        target: usize,
        row: usize,
    },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Single { .. } => GateKind::Single,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cid { .. } => GateKind::Cid,
        }
    }

    pub fn row(&self) -> usize {
        match *self {
            Gate::Single { row, .. } | Gate::Cnot { row, .. } | Gate::Cid { row, .. } => row,
        }
    }

    pub fn is_two_body(&self) -> bool {
        !matches!(self, Gate::Single { .. })
    }

    /// `(control, target)` for two-body gates.
    pub fn pair(&self) -> Option<(usize, usize)> {
        match *self {
            Gate::Single { .. } => None,
            Gate::Cnot {
                control, target, ..
            }
            | Gate::Cid {
                control, target, ..
            } => Some((control, target)),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::Single { qubit, .. } => vec![qubit],
            _ => {
                let (c, t) = self.pair().unwrap();
                vec![c, t]
            }
        }
    }
}

/// Input selection: penalty `lambda` on the row-0 site of the complementary bit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pin {
    pub qubit: usize,
    pub bit: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// A ground-state computer: `num_qubits` chains of `num_steps + 1` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub num_qubits: usize,
    pub num_steps: usize,
    pub epsilon: f64,
    pub gates: Vec<Gate>,
    pub pins: Vec<Pin>,
    pub tip_beta: Option<f64>,
    /// Qubits that receive a readout particle, in particle order.
    pub readout: Vec<usize>,
    /// Readout repulsion strength; defaults to `epsilon`.
    pub readout_coupling: Option<f64>,
}

/// Roles a qubit plays in the two-body gates of one row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SlotRoles {
    /// Index of the gate in which the qubit is the control.
    pub control_of: Option<usize>,
    /// Index of the gate in which the qubit is the target.
    pub target_of: Option<usize>,
}

impl Program {
    pub fn new(num_qubits: usize, num_steps: usize) -> Self {
        Program {
            num_qubits,
            num_steps,
            epsilon: 1.0,
            gates: Vec::new(),
            pins: Vec::new(),
            tip_beta: None,
            readout: Vec::new(),
            readout_coupling: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn single(mut self, qubit: usize, row: usize, matrix: Unitary) -> Self {
        self.gates.push(Gate::Single { qubit, row, matrix });
        self
    }

    pub fn cnot(mut self, control: usize, target: usize, row: usize) -> Self {
        self.gates.push(Gate::Cnot {
            control,
            target,
            row,
        });
        self
    }

    pub fn cid(mut self, control: usize, target: usize, row: usize) -> Self {
        self.gates.push(Gate::Cid {
            control,
            target,
            row,
        });
        self
    }

    pub fn pin(mut self, qubit: usize, bit: u8) -> Self {
        self.pins.push(Pin {
            qubit,
            bit,
            lambda: None,
        });
        self
    }

    /// Pins every qubit; `bits[a]` is the input of qubit `a`.
    pub fn pin_all(mut self, bits: &[u8]) -> Self {
        for (qubit, &bit) in bits.iter().enumerate() {
            self = self.pin(qubit, bit);
        }
        self
    }

    pub fn tipped(mut self, beta: f64) -> Self {
        self.tip_beta = Some(beta);
        self
    }

    pub fn with_readout(mut self, qubits: &[usize]) -> Self {
        self.readout = qubits.to_vec();
        self
    }

    pub fn beta(&self) -> f64 {
        self.tip_beta.unwrap_or(1.0)
    }

    pub fn pin_strength(&self, pin: &Pin) -> f64 {
        pin.lambda.unwrap_or(self.epsilon)
    }

    pub fn readout_strength(&self) -> f64 {
        self.readout_coupling.unwrap_or(self.epsilon)
    }

    pub fn two_body_gates(&self) -> impl Iterator<Item = (usize, &Gate)> {
        self.gates.iter().enumerate().filter(|(_, g)| g.is_two_body())
    }

    pub fn has_two_body(&self) -> bool {
        self.gates.iter().any(Gate::is_two_body)
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    /// Input bits if every qubit is pinned.
    pub fn pinned_input(&self) -> Option<Vec<u8>> {
        let mut bits = vec![None; self.num_qubits];
        for p in &self.pins {
            if p.qubit < self.num_qubits {
                bits[p.qubit] = Some(p.bit);
            }
        }
        bits.into_iter().collect()
    }

    /// Single-qubit gate occupying `(qubit, row)`, if any.
    pub fn single_at(&self, qubit: usize, row: usize) -> Option<&Unitary> {
        self.gates.iter().find_map(|g| match g {
            Gate::Single {
                qubit: q,
                row: r,
                matrix,
            } if *q == qubit && *r == row => Some(matrix),
            _ => None,
        })
    }

    /// Two-body roles of every qubit at `row`.
    pub fn roles_at(&self, row: usize) -> Vec<SlotRoles> {
        let mut roles = vec![SlotRoles::default(); self.num_qubits];
        for (idx, gate) in self.two_body_gates() {
            if gate.row() != row {
                continue;
            }
            let (c, t) = gate.pair().unwrap();
            if c < self.num_qubits {
                roles[c].control_of = Some(idx);
            }
            if t < self.num_qubits {
                roles[t].target_of = Some(idx);
            }
        }
        roles
    }

    /// Two-body gates of `row` grouped into chains that share qubits,
    /// each chain listed control-first. Assumes a validated program.
    pub fn two_body_chains(&self, row: usize) -> Vec<Vec<usize>> {
        let at_row: Vec<usize> = self
            .two_body_gates()
            .filter(|(_, g)| g.row() == row)
            .map(|(i, _)| i)
            .collect();
        let roles = self.roles_at(row);
        let mut chains = Vec::new();
        for &start in &at_row {
            let (control, _) = self.gates[start].pair().unwrap();
            // chain heads are gates whose control is not itself a target
            if roles[control].target_of.is_some() {
                continue;
            }
            let mut chain = vec![start];
            let mut cur = start;
            loop {
                let (_, target) = self.gates[cur].pair().unwrap();
                match roles[target].control_of {
                    Some(next) => {
                        chain.push(next);
                        cur = next;
                    }
                    None => break,
                }
            }
            chains.push(chain);
        }
        chains.sort_by_key(|c| c[0]);
        chains
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.num_qubits, self.num_steps);
        if m == 0 {
            return Err(Error::Validation("qubits: must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::Validation("steps: must be at least 1".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Validation(format!(
                "epsilon: must be positive, got {}",
                self.epsilon
            )));
        }
        let mut singles: HashMap<(usize, usize), usize> = HashMap::new();
        for (idx, gate) in self.gates.iter().enumerate() {
            let row = gate.row();
            if row == 0 || row > n {
                return Err(Error::Validation(format!(
                    "gates[{idx}].row: {row} outside 1..={n}"
                )));
            }
            for q in gate.qubits() {
                if q >= m {
                    return Err(Error::Validation(format!(
                        "gates[{idx}]: qubit {q} outside 0..{m}"
                    )));
                }
            }
            match gate {
                Gate::Single { qubit, matrix, .. } => {
                    let defect = unitarity_defect(matrix);
                    if !(defect <= UNITARITY_TOL) {
                        return Err(Error::Validation(format!(
                            "gates[{idx}].matrix: not unitary (|U^dag U - I| = {defect:.3e})"
                        )));
                    }
                    if let Some(prev) = singles.insert((*qubit, row), idx) {
                        return Err(Error::Validation(format!(
                            "gates[{idx}]: slot (qubit {qubit}, row {row}) already holds gates[{prev}]"
                        )));
                    }
                }
                _ => {
                    let (c, t) = gate.pair().unwrap();
                    if c == t {
                        return Err(Error::Validation(format!(
                            "gates[{idx}]: control and target are both qubit {c}"
                        )));
                    }
                }
            }
        }

        let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (idx, gate) in self.two_body_gates() {
            by_row.entry(gate.row()).or_default().push(idx);
        }
        for (&row, gates) in &by_row {
            let mut control_of: HashMap<usize, usize> = HashMap::new();
            let mut target_of: HashMap<usize, usize> = HashMap::new();
            for &idx in gates {
                let (c, t) = self.gates[idx].pair().unwrap();
                for q in [c, t] {
                    if let Some(&s) = singles.get(&(q, row)) {
                        return Err(Error::Validation(format!(
                            "gates[{idx}]: slot (qubit {q}, row {row}) already holds gates[{s}]"
                        )));
                    }
                }
                if let Some(prev) = control_of.insert(c, idx) {
                    return Err(Error::Validation(format!(
                        "gates[{idx}]: qubit {c} already controls gates[{prev}] at row {row}"
                    )));
                }
                if let Some(prev) = target_of.insert(t, idx) {
                    return Err(Error::Validation(format!(
                        "gates[{idx}]: qubit {t} is already the target of gates[{prev}] at row {row}"
                    )));
                }
            }
            // with at most one role of each kind, shared qubits form paths or cycles
            for &idx in gates {
                let mut cur = idx;
                for _ in 0..=gates.len() {
                    let (_, t) = self.gates[cur].pair().unwrap();
                    match control_of.get(&t) {
                        Some(&next) if next == idx => {
                            return Err(Error::Validation(format!(
                                "gates[{idx}]: two-body gates at row {row} form a cycle"
                            )));
                        }
                        Some(&next) => cur = next,
                        None => break,
                    }
                }
            }
        }

        let mut pinned = vec![false; m];
        for (i, pin) in self.pins.iter().enumerate() {
            if pin.qubit >= m {
                return Err(Error::Validation(format!(
                    "pins[{i}].qubit: {} outside 0..{m}",
                    pin.qubit
                )));
            }
            if pin.bit > 1 {
                return Err(Error::Validation(format!(
                    "pins[{i}].bit: must be 0 or 1, got {}",
                    pin.bit
                )));
            }
            let lambda = self.pin_strength(pin);
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::Validation(format!(
                    "pins[{i}].lambda: must be positive, got {lambda}"
                )));
            }
            if std::mem::replace(&mut pinned[pin.qubit], true) {
                return Err(Error::Validation(format!(
                    "pins[{i}]: qubit {} pinned twice",
                    pin.qubit
                )));
            }
        }

        if let Some(beta) = self.tip_beta {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::Validation(format!(
                    "tip_beta: must lie in (0, 1], got {beta}"
                )));
            }
        }
        let mut seen = vec![false; m];
        for (i, &q) in self.readout.iter().enumerate() {
            if q >= m {
                return Err(Error::Validation(format!(
                    "readout[{i}]: qubit {q} outside 0..{m}"
                )));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::Validation(format!(
                    "readout[{i}]: qubit {q} listed twice"
                )));
            }
        }
        if let Some(v) = self.readout_coupling {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!(
                    "readout coupling must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProgramFile = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("program file: {e}")))?;
        let program = Program::try_from(file)?;
        program.validate()?;
        Ok(program)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Program::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProgramFile::from(self)).expect("program serializes")
    }
}

type MatrixRecord = [[[f64; 2]; 2]; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum GateRecord {
    Single {
        row: usize,
        qubit: usize,
        matrix: MatrixRecord,
    },
    Cnot {
        row: usize,
        control: usize,
        target: usize,
    },
    Cid {
        row: usize,
        control: usize,
        target: usize,
    },
}

/// On-disk program document.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramFile {
    qubits: usize,
    steps: usize,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default)]
    gates: Vec<GateRecord>,
    #[serde(default)]
    pins: Vec<Pin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tip_beta: Option<f64>,
    #[serde(default)]
    readout: Vec<usize>,
}

fn default_epsilon() -> f64 {
    1.0
}

impl TryFrom<ProgramFile> for Program {
    type Error = Error;

    fn try_from(file: ProgramFile) -> Result<Self> {
        let gates = file
            .gates
            .into_iter()
            .map(|g| match g {
                GateRecord::Single { row, qubit, matrix } => {
                    let mut u = identity();
                    for (i, line) in matrix.iter().enumerate() {
                        for (j, z) in line.iter().enumerate() {
                            u[i][j] = Complex64::new(z[0], z[1]);
                        }
                    }
                    Gate::Single {
                        qubit,
                        row,
                        matrix: u,
                    }
                }
                GateRecord::Cnot {
                    row,
                    control,
                    target,
                } => Gate::Cnot {
                    control,
                    target,
                    row,
                },
                GateRecord::Cid {
                    row,
                    control,
                    target,
                } => Gate::Cid {
                    control,
                    target,
                    row,
                },
            })
            .collect();
        Ok(Program {
            num_qubits: file.qubits,
            num_steps: file.steps,
            epsilon: file.epsilon,
            gates,
            pins: file.pins,
            tip_beta: file.tip_beta,
            readout: file.readout,
            readout_coupling: None,
        })
    }
}

impl From<&Program> for ProgramFile {
    fn from(p: &Program) -> Self {
        let gates = p
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Single { qubit, row, matrix } => {
                    let mut m = [[[0.0; 2]; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            m[i][j] = [matrix[i][j].re, matrix[i][j].im];
                        }
                    }
                    GateRecord::Single {
                        row,
                        qubit,
                        matrix: m,
                    }
                }
                Gate::Cnot {
                    control,
                    target,
                    row,
                } => GateRecord::Cnot {
                    row,
                    control,
                    target,
                },
                Gate::Cid {
                    control,
                    target,
                    row,
                } => GateRecord::Cid {
                    row,
                    control,
                    target,
                },
            })
            .collect();
        ProgramFile {
            qubits: p.num_qubits,
            steps: p.num_steps,
            epsilon: p.epsilon,
            gates,
            pins: p.pins.clone(),
            tip_beta: p.tip_beta,
            readout: p.readout.clone(),
        }
    }
}
