//! Gate-level circuit IR, the QAOA circuit builders, gate counting and
//! trapped-ion gateset transpilation.
//!
//! Rotation conventions: `Rx(t) = exp(-i t X / 2)`, likewise for `Ry`/`Rz`,
//! and `Rzz(t) = exp(-i t Z⊗Z / 2)`, so `Rzz(2γ) = exp(-iγ Z⊗Z)` and
//! `Rx(2β) = exp(-iβ X)`. `CX` lists the control first. Global phase is not
//! tracked anywhere in the IR.

mod build;
mod census;
pub mod qasm;
mod transpile;

pub use build::{
    build_qaoa_circuit, build_qaoa_circuit_ordered, clause_layers, clause_phase_separator,
    measurement_uncompute, relative_phase_and, ClauseOrder,
};
pub use census::{census, GateCensus};
pub use transpile::{lower_rzz, transpile, Gateset};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    X,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Rzz(f64),
    Cx,
    Cz,
    /// Computational-basis measurement into the given classical bit.
    Measure(usize),
    Reset,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Rzz(_) | GateKind::Cx | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.arity() == 2
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure(_) | GateKind::Reset)
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Rzz(_) => "rzz",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Measure(_) => "measure",
            GateKind::Reset => "reset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    /// Classical bit that must read 1 for the gate to act.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<usize>,
}

impl GateOp {
    pub fn one(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            qubits: vec![q],
            condition: None,
        }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self {
            kind,
            qubits: vec![a, b],
            condition: None,
        }
    }

    pub fn h(q: usize) -> Self {
        Self::one(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Self::one(GateKind::X, q)
    }
    pub fn z(q: usize) -> Self {
        Self::one(GateKind::Z, q)
    }
    pub fn rx(theta: f64, q: usize) -> Self {
        Self::one(GateKind::Rx(theta), q)
    }
    pub fn ry(theta: f64, q: usize) -> Self {
        Self::one(GateKind::Ry(theta), q)
    }
    pub fn rz(theta: f64, q: usize) -> Self {
        Self::one(GateKind::Rz(theta), q)
    }
    pub fn rzz(theta: f64, a: usize, b: usize) -> Self {
        Self::two(GateKind::Rzz(theta), a, b)
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::two(GateKind::Cx, control, target)
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::two(GateKind::Cz, a, b)
    }
    pub fn measure(q: usize, clbit: usize) -> Self {
        Self::one(GateKind::Measure(clbit), q)
    }
    pub fn reset(q: usize) -> Self {
        Self::one(GateKind::Reset, q)
    }

    pub fn when(mut self, clbit: usize) -> Self {
        self.condition = Some(clbit);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CircuitMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles_id: Option<String>,
    /// Qubits `0..data_qubits` carry problem variables; the rest are ancillas.
    /// Classical bits `0..data_qubits` receive the terminal measurement.
    pub data_qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub ops: Vec<GateOp>,
    pub metadata: CircuitMetadata,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Self {
            num_qubits,
            num_clbits,
            ops: Vec::new(),
            metadata: CircuitMetadata {
                data_qubits: num_qubits,
                ..Default::default()
            },
        }
    }

    pub fn from_ops(
        num_qubits: usize,
        num_clbits: usize,
        ops: Vec<GateOp>,
        metadata: CircuitMetadata,
    ) -> Result<Self> {
        let c = Self {
            num_qubits,
            num_clbits,
            ops,
            metadata,
        };
        c.validate()?;
        Ok(c)
    }

    /// Checks qubit ranges and distinctness, classical-bit ranges, and that
    /// every condition reads a bit some earlier measurement wrote.
    pub fn validate(&self) -> Result<()> {
        if self.metadata.data_qubits > self.num_qubits {
            return Err(Error::InvalidCircuit(format!(
                "{} data qubits on a {}-qubit circuit",
                self.metadata.data_qubits, self.num_qubits
            )));
        }
        let mut written = vec![false; self.num_clbits];
        for (i, op) in self.ops.iter().enumerate() {
            let bad = |msg: String| Err(Error::InvalidCircuit(format!("op {i}: {msg}")));
            if op.qubits.len() != op.kind.arity() {
                return bad(format!(
                    "{} expects {} qubits, got {}",
                    op.kind.name(),
                    op.kind.arity(),
                    op.qubits.len()
                ));
            }
            if let Some(&q) = op.qubits.iter().find(|&&q| q >= self.num_qubits) {
                return bad(format!("qubit {q} out of range"));
            }
            if op.qubits.len() == 2 && op.qubits[0] == op.qubits[1] {
                return bad("repeated qubit".into());
            }
            if let Some(c) = op.condition {
                if !written.get(c).copied().unwrap_or(false) {
                    return bad(format!("condition on bit {c} before it is measured"));
                }
            }
            if let GateKind::Measure(c) = op.kind {
                match written.get_mut(c) {
                    Some(w) => *w = true,
                    None => return bad(format!("classical bit {c} out of range")),
                }
            }
        }
        Ok(())
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    /// Index where the trailing block of unconditioned measurements begins.
    pub fn terminal_start(&self) -> usize {
        let mut i = self.ops.len();
        while i > 0 {
            let op = &self.ops[i - 1];
            if matches!(op.kind, GateKind::Measure(_)) && op.condition.is_none() {
                i -= 1;
            } else {
                break;
            }
        }
        i
    }

    /// True when any measurement, reset or conditioned gate occurs before
    /// the terminal measurement block.
    pub fn has_mid_circuit_ops(&self) -> bool {
        self.ops[..self.terminal_start()]
            .iter()
            .any(|op| !op.kind.is_unitary() || op.condition.is_some())
    }

    pub fn without_terminal_measurement(&self) -> Circuit {
        let mut c = self.clone();
        c.ops.truncate(self.terminal_start());
        c
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// QAOA angles for `p` rounds, in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSchedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl AngleSchedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidParameters("angle schedule needs p >= 1".into()));
        }
        if gammas.len() != betas.len() {
            return Err(Error::InvalidParameters(format!(
                "{} gammas but {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameters("non-finite angle".into()));
        }
        Ok(Self { gammas, betas })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p], vec![0.0; p])
    }

    pub fn constant(p: usize, gamma: f64, beta: f64) -> Result<Self> {
        Self::new(vec![gamma; p], vec![beta; p])
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Flat `[γ1..γp, β1..βp]` parameter vector.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::InvalidParameters("odd parameter count".into()));
        }
        let p = flat.len() / 2;
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }

    /// Same schedule with one extra round `(gamma, beta)` appended.
    pub fn extended(&self, gamma: f64, beta: f64) -> Self {
        let mut s = self.clone();
        s.gammas.push(gamma);
        s.betas.push(beta);
        s
    }

    /// Wraps γ into `[0, 2π)` and β into `[0, π)`.
    pub fn wrapped(&self) -> Self {
        use std::f64::consts::{PI, TAU};
        Self {
            gammas: self.gammas.iter().map(|&g| wrap(g, TAU)).collect(),
            betas: self.betas.iter().map(|&b| wrap(b, PI)).collect(),
        }
    }

    pub fn id(&self) -> String {
        let mut hasher = Sha256::new();
        for a in self.gammas.iter().chain(&self.betas) {
            hasher.update(a.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn wrap(a: f64, period: f64) -> f64 {
    let w = a.rem_euclid(period);
    // rem_euclid can round up to exactly `period`
    if w >= period {
        0.0
    } else {
        w
    }
}
