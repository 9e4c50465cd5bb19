use serde::{Deserialize, Serialize};

use super::{Circuit, GateKind};

/// Gate counts and depth of a circuit.
///
/// Depth is the longest dependency chain where two ops depend on each other
/// when they share a qubit or a classical bit (a measurement writes its bit,
/// a conditioned gate reads its condition). Measurements and resets occupy
/// one layer each like single-qubit gates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCensus {
    pub one_qubit_count: usize,
    pub two_qubit_count: usize,
    pub measure_count: usize,
    pub reset_count: usize,
    pub depth: usize,
}

impl GateCensus {
    pub fn total(&self) -> usize {
        self.one_qubit_count + self.two_qubit_count + self.measure_count + self.reset_count
    }
}

pub fn census(circuit: &Circuit) -> GateCensus {
    let mut out = GateCensus::default();
    let nq = circuit.num_qubits;
    let mut level = vec![0usize; nq + circuit.num_clbits];
    let mut wires = Vec::with_capacity(4);
    for op in &circuit.ops {
        match op.kind {
            GateKind::Measure(_) => out.measure_count += 1,
            GateKind::Reset => out.reset_count += 1,
            k if k.is_two_qubit() => out.two_qubit_count += 1,
            _ => out.one_qubit_count += 1,
        }
        wires.clear();
        wires.extend(op.qubits.iter().copied());
        if let GateKind::Measure(c) = op.kind {
            wires.push(nq + c);
        }
        if let Some(c) = op.condition {
            wires.push(nq + c);
        }
        let l = 1 + wires.iter().map(|&w| level[w]).max().unwrap_or(0);
        for &w in &wires {
            level[w] = l;
        }
        out.depth = out.depth.max(l);
    }
    out
}
