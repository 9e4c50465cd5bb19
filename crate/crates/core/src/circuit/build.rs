//! QAOA circuit synthesis for MAX k-SAT.
//!
//! A clause phase separator `exp(-iγ H_Cj)` equals, up to the global phase
//! `exp(-iγ)`, a phase of `exp(+iγ)` on the clause's single falsifying
//! assignment. After X-conjugating the positively-literaled qubits that
//! assignment becomes all-ones, so the block is a `(k-1)`-controlled phase.
//!
//! * `k = 3`: CCPhase from three `Rz(γ/4)`, a four-CX parity ladder onto the
//!   third qubit and one `Rzz(-γ/4)` between the first two (5 two-qubit gates).
//! * `k > 3`: controls are ANDed pairwise into ancillas with a relative-phase
//!   Toffoli (3 CX), the innermost ancilla carries the CCPhase ladder, and every
//!   ancilla is erased by X-basis measurement with classically conditioned
//!   CZ/Z corrections. That costs `4k - 8` two-qubit gates and `k - 3` ancillas.

use super::{AngleSchedule, Circuit, CircuitMetadata, GateKind, GateOp};
use crate::error::{Error, Result};
use crate::sat::{Clause, KSatInstance};

/// Relative-phase AND of `a` and `b` into a `|0⟩` ancilla: Margolus (RCCX)
/// followed by `S†` on the target. Exact on a `|0⟩` target.
pub fn relative_phase_and(a: usize, b: usize, target: usize) -> Vec<GateOp> {
    vec![
        GateOp::h(target),
        GateOp::one(GateKind::T, target),
        GateOp::cx(b, target),
        GateOp::one(GateKind::Tdg, target),
        GateOp::cx(a, target),
        GateOp::one(GateKind::T, target),
        GateOp::cx(b, target),
        GateOp::one(GateKind::Tdg, target),
        GateOp::h(target),
        GateOp::one(GateKind::Sdg, target),
    ]
}

/// Phase-polynomial ladder for `exp(iγ c0 c1 t)`; the closing `CX(c1, t)` is
/// omitted when `close` is false (the measured-ancilla case).
fn ccphase_ladder(c0: usize, c1: usize, t: usize, gamma: f64, close: bool) -> Vec<GateOp> {
    let q = gamma / 4.0;
    let mut ops = vec![
        GateOp::rz(q, c0),
        GateOp::rz(q, c1),
        GateOp::rz(q, t),
        GateOp::cx(c0, t),
        GateOp::rz(-q, t),
        GateOp::cx(c1, t),
        GateOp::rz(q, t),
        GateOp::cx(c0, t),
        GateOp::rz(-q, t),
    ];
    if close {
        ops.push(GateOp::cx(c1, t));
    }
    ops.push(GateOp::rzz(-q, c0, c1));
    ops
}

/// Erases `ancilla`, which holds `and_inputs.0 ∧ and_inputs.1`.
///
/// With `ladder = Some((c0, c1))` the ancilla first serves as the target of
/// the open CCPhase ladder over `(c0, c1, ancilla)`, leaving it in the state
/// `AND ⊕ c1`. The ancilla is then measured in the X basis and reset; on
/// outcome 1 a conditioned `Z` on `c1` and a conditioned `CZ` on the AND
/// inputs undo the phase kick, so the data-qubit result is the same for both
/// outcomes.
pub fn measurement_uncompute(
    ancilla: usize,
    and_inputs: (usize, usize),
    ladder: Option<(usize, usize)>,
    gamma: f64,
    clbit: usize,
) -> Vec<GateOp> {
    let mut ops = match ladder {
        Some((c0, c1)) => ccphase_ladder(c0, c1, ancilla, gamma, false),
        None => Vec::new(),
    };
    ops.push(GateOp::h(ancilla));
    ops.push(GateOp::measure(ancilla, clbit));
    ops.push(GateOp::reset(ancilla));
    if let Some((_, c1)) = ladder {
        ops.push(GateOp::z(c1).when(clbit));
    }
    ops.push(GateOp::cz(and_inputs.0, and_inputs.1).when(clbit));
    ops
}

/// Gate sequence for `exp(-iγ H_Cj)` up to global phase.
///
/// `ancillas` and `clbits` must provide at least `k - 3` entries each; the
/// ancillas are returned to `|0⟩` at the end of the block.
pub fn clause_phase_separator(
    clause: &Clause,
    gamma: f64,
    ancillas: &[usize],
    clbits: &[usize],
) -> Result<Vec<GateOp>> {
    let k = clause.width();
    if k < 3 {
        return Err(Error::Unsupported(format!(
            "clause width {k}; phase separators need k >= 3"
        )));
    }
    let extra = k - 3;
    if ancillas.len() < extra || clbits.len() < extra {
        return Err(Error::Builder(format!(
            "width-{k} clause needs {extra} ancillas and classical bits, got {} and {}",
            ancillas.len(),
            clbits.len()
        )));
    }
    let qubits: Vec<usize> = clause.literals().iter().map(|l| l.variable).collect();
    let flips: Vec<GateOp> = clause
        .literals()
        .iter()
        .filter(|l| !l.negated)
        .map(|l| GateOp::x(l.variable))
        .collect();

    let mut ops = flips.clone();
    if extra == 0 {
        ops.extend(ccphase_ladder(qubits[0], qubits[1], qubits[2], gamma, true));
    } else {
        let mut pairs = Vec::with_capacity(extra);
        let mut prev = qubits[0];
        for (i, &anc) in ancillas[..extra].iter().enumerate() {
            ops.extend(relative_phase_and(prev, qubits[i + 1], anc));
            pairs.push((prev, qubits[i + 1]));
            prev = anc;
        }
        let last = extra - 1;
        ops.extend(measurement_uncompute(
            ancillas[last],
            pairs[last],
            Some((qubits[k - 2], qubits[k - 1])),
            gamma,
            clbits[last],
        ));
        for i in (0..last).rev() {
            ops.extend(measurement_uncompute(ancillas[i], pairs[i], None, gamma, clbits[i]));
        }
    }
    ops.extend(flips);
    Ok(ops)
}

/// Order in which clause blocks are emitted within a round. Clause phase
/// separators commute, so the order changes depth but not the unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClauseOrder {
    /// Instance order.
    #[default]
    Instance,
    /// Clauses grouped into layers of pairwise variable-disjoint clauses
    /// (first-fit over instance order), emitted layer by layer.
    Layered,
}

impl std::str::FromStr for ClauseOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "instance" => Ok(ClauseOrder::Instance),
            "layered" => Ok(ClauseOrder::Layered),
            other => Err(Error::Unsupported(format!("clause order {other:?}"))),
        }
    }
}

/// First-fit partition of clause indices into layers whose clauses touch
/// pairwise disjoint variables.
pub fn clause_layers(instance: &KSatInstance) -> Vec<Vec<usize>> {
    let mut layers: Vec<(u64, Vec<usize>)> = Vec::new();
    for (j, clause) in instance.clauses().iter().enumerate() {
        let mask = clause.mask();
        match layers.iter_mut().find(|(used, _)| used & mask == 0) {
            Some((used, members)) => {
                *used |= mask;
                members.push(j);
            }
            None => layers.push((mask, vec![j])),
        }
    }
    layers.into_iter().map(|(_, members)| members).collect()
}

/// Full QAOA circuit: `H` on every variable qubit, `p` rounds of clause
/// phase separators (instance order) and `Rx(2β)` mixers, then a terminal
/// measurement of variable `i` into classical bit `i`.
///
/// For `k > 3`, `k - 3` ancilla qubits follow the variable qubits and are
/// shared by all clauses; every mid-circuit measurement gets its own
/// classical bit after the first `n`.
pub fn build_qaoa_circuit(instance: &KSatInstance, angles: &AngleSchedule) -> Result<Circuit> {
    build_qaoa_circuit_ordered(instance, angles, ClauseOrder::Instance)
}

pub fn build_qaoa_circuit_ordered(
    instance: &KSatInstance,
    angles: &AngleSchedule,
    order: ClauseOrder,
) -> Result<Circuit> {
    let (n, k, m) = (instance.n(), instance.k(), instance.m());
    if k < 3 {
        return Err(Error::Unsupported(format!(
            "k = {k}; only k >= 3 circuits are synthesized"
        )));
    }
    let extra = k - 3;
    let ancillas: Vec<usize> = (n..n + extra).collect();
    let num_clbits = n + m * extra * angles.p();
    let sequence: Vec<usize> = match order {
        ClauseOrder::Instance => (0..m).collect(),
        ClauseOrder::Layered => clause_layers(instance).concat(),
    };

    let mut ops = Vec::new();
    ops.extend((0..n).map(GateOp::h));
    let mut next_clbit = n;
    for (&gamma, &beta) in angles.gammas().iter().zip(angles.betas()) {
        for &j in &sequence {
            let bits: Vec<usize> = (next_clbit..next_clbit + extra).collect();
            next_clbit += extra;
            ops.extend(clause_phase_separator(&instance.clauses()[j], gamma, &ancillas, &bits)?);
        }
        ops.extend((0..n).map(|q| GateOp::rx(2.0 * beta, q)));
    }
    ops.extend((0..n).map(|q| GateOp::measure(q, q)));

    let metadata = CircuitMetadata {
        instance_id: Some(instance.id()),
        p: Some(angles.p()),
        angles_id: Some(angles.id()),
        data_qubits: n,
    };
    Circuit::from_ops(n + extra, num_clbits, ops, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::census;
    use crate::sat::{generate_random_ksat, Literal};

    fn clause(width: usize) -> Clause {
        Clause::new(
            (0..width)
                .map(|v| Literal {
                    variable: v,
                    negated: v % 2 == 0,
                })
                .collect(),
        )
        .unwrap()
    }

    fn two_qubit(ops: &[GateOp]) -> usize {
        ops.iter().filter(|o| o.kind.is_two_qubit()).count()
    }

    #[test]
    fn clause_two_qubit_counts() {
        for k in 3..=7 {
            let anc: Vec<usize> = (k..k + k - 3).collect();
            let bits: Vec<usize> = (0..k - 3).collect();
            let ops = clause_phase_separator(&clause(k), 0.3, &anc, &bits).unwrap();
            let expect = if k == 3 { 5 } else { 4 * k - 8 };
            assert_eq!(two_qubit(&ops), expect, "k = {k}");
        }
        let ops = clause_phase_separator(&clause(3), 0.3, &[], &[]).unwrap();
        let cx = ops.iter().filter(|o| o.kind == GateKind::Cx).count();
        let rzz = ops.iter().filter(|o| matches!(o.kind, GateKind::Rzz(_))).count();
        assert_eq!((cx, rzz), (4, 1));
    }

    #[test]
    fn insufficient_ancillas() {
        assert!(matches!(
            clause_phase_separator(&clause(5), 0.3, &[5], &[0]),
            Err(Error::Builder(_))
        ));
        assert!(matches!(
            clause_phase_separator(&clause(2), 0.3, &[], &[]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn qaoa_circuit_layout() {
        let inst = generate_random_ksat(6, 3, 4.0, 1).unwrap();
        let angles = AngleSchedule::constant(1, 0.2, 0.3).unwrap();
        let c = build_qaoa_circuit(&inst, &angles).unwrap();
        assert_eq!(c.num_qubits, 6);
        assert_eq!(census(&c).two_qubit_count, 120);
        assert!(!c.has_mid_circuit_ops());
        assert_eq!(c.terminal_start(), c.ops.len() - 6);

        let inst = generate_random_ksat(4, 4, 1.0, 3).unwrap();
        let c = build_qaoa_circuit(&inst, &angles).unwrap();
        assert_eq!(c.num_qubits, 5);
        assert_eq!(c.num_clbits, 4 + 4);
        assert_eq!(census(&c).two_qubit_count, 32);
        assert!(c.has_mid_circuit_ops());
    }

    #[test]
    fn rejects_two_sat() {
        let inst = generate_random_ksat(4, 2, 1.0, 3).unwrap();
        let angles = AngleSchedule::constant(1, 0.2, 0.3).unwrap();
        assert!(matches!(
            build_qaoa_circuit(&inst, &angles),
            Err(Error::Unsupported(_))
        ));
    }
}
