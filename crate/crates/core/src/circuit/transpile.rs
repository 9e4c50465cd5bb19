//! Rewrites into the trapped-ion gatesets `{rzz, rz, ry, rx}` and
//! `{cx, rz, ry, rx}` for all-to-all connectivity, followed by fusion of
//! adjacent same-axis rotations.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Circuit, GateKind, GateOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gateset {
    /// `rzz, rz, ry, rx`
    RzzSet,
    /// `cx, rz, ry, rx`
    CxSet,
}

impl FromStr for Gateset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rzz" | "rzz_set" | "quantinuum" => Ok(Gateset::RzzSet),
            "cx" | "cx_set" | "ionq" => Ok(Gateset::CxSet),
            other => Err(Error::Unsupported(format!("target gateset {other:?}"))),
        }
    }
}

impl fmt::Display for Gateset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gateset::RzzSet => "rzz,rz,ry,rx",
            Gateset::CxSet => "cx,rz,ry,rx",
        })
    }
}

impl Gateset {
    pub fn contains(&self, kind: &GateKind) -> bool {
        match kind {
            GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_) => true,
            GateKind::Measure(_) | GateKind::Reset => true,
            GateKind::Rzz(_) => *self == Gateset::RzzSet,
            GateKind::Cx => *self == Gateset::CxSet,
            _ => false,
        }
    }
}

fn hadamard(q: usize, out: &mut Vec<GateOp>) {
    out.push(GateOp::rz(PI, q));
    out.push(GateOp::ry(FRAC_PI_2, q));
}

fn cz_into(a: usize, b: usize, gateset: Gateset, out: &mut Vec<GateOp>) {
    match gateset {
        Gateset::RzzSet => {
            out.push(GateOp::rz(-FRAC_PI_2, a));
            out.push(GateOp::rz(-FRAC_PI_2, b));
            out.push(GateOp::rzz(FRAC_PI_2, a, b));
        }
        Gateset::CxSet => {
            hadamard(b, out);
            out.push(GateOp::cx(a, b));
            hadamard(b, out);
        }
    }
}

fn rewrite(op: &GateOp, gateset: Gateset, out: &mut Vec<GateOp>) {
    let start = out.len();
    let q = &op.qubits;
    match op.kind {
        GateKind::H => hadamard(q[0], out),
        GateKind::X => out.push(GateOp::rx(PI, q[0])),
        GateKind::Z => out.push(GateOp::rz(PI, q[0])),
        GateKind::S => out.push(GateOp::rz(FRAC_PI_2, q[0])),
        GateKind::Sdg => out.push(GateOp::rz(-FRAC_PI_2, q[0])),
        GateKind::T => out.push(GateOp::rz(FRAC_PI_4, q[0])),
        GateKind::Tdg => out.push(GateOp::rz(-FRAC_PI_4, q[0])),
        GateKind::Cz => cz_into(q[0], q[1], gateset, out),
        GateKind::Cx if gateset == Gateset::RzzSet => {
            hadamard(q[1], out);
            cz_into(q[0], q[1], gateset, out);
            hadamard(q[1], out);
        }
        GateKind::Rzz(theta) if gateset == Gateset::CxSet => {
            out.push(GateOp::cx(q[0], q[1]));
            out.push(GateOp::rz(theta, q[1]));
            out.push(GateOp::cx(q[0], q[1]));
        }
        _ => out.push(GateOp {
            kind: op.kind,
            qubits: op.qubits.clone(),
            condition: None,
        }),
    }
    if let Some(c) = op.condition {
        for g in &mut out[start..] {
            g.condition = Some(c);
        }
    }
}

/// Rewrites `circuit` into `gateset`, preserving its action up to global
/// phase, then fuses adjacent unconditioned rotations about the same axis on
/// the same qubit and drops rotations that became multiples of 2π.
pub fn transpile(circuit: &Circuit, gateset: Gateset) -> Circuit {
    let mut raw = Vec::with_capacity(circuit.ops.len() * 2);
    for op in &circuit.ops {
        rewrite(op, gateset, &mut raw);
    }
    Circuit {
        num_qubits: circuit.num_qubits,
        num_clbits: circuit.num_clbits,
        ops: fuse_rotations(raw, circuit.num_qubits),
        metadata: circuit.metadata.clone(),
    }
}

fn same_axis(a: &GateKind, b: &GateKind) -> Option<fn(f64) -> GateKind> {
    match (a, b) {
        (GateKind::Rx(_), GateKind::Rx(_)) => Some(GateKind::Rx),
        (GateKind::Ry(_), GateKind::Ry(_)) => Some(GateKind::Ry),
        (GateKind::Rz(_), GateKind::Rz(_)) => Some(GateKind::Rz),
        _ => None,
    }
}

fn angle(k: &GateKind) -> f64 {
    match *k {
        GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) => t,
        _ => 0.0,
    }
}

fn is_identity_rotation(theta: f64) -> bool {
    let r = theta.rem_euclid(TAU);
    r < 1e-12 || TAU - r < 1e-12
}

fn fuse_rotations(ops: Vec<GateOp>, num_qubits: usize) -> Vec<GateOp> {
    let mut slots: Vec<Option<GateOp>> = Vec::with_capacity(ops.len());
    // per qubit: output slots touching it, most recent last
    let mut history: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    for op in ops {
        let fusible = op.qubits.len() == 1 && op.condition.is_none();
        if fusible {
            let q = op.qubits[0];
            if let Some(&prev) = history[q].last() {
                let merged = slots[prev].as_ref().and_then(|p| {
                    if p.condition.is_some() {
                        return None;
                    }
                    same_axis(&p.kind, &op.kind).map(|mk| mk(angle(&p.kind) + angle(&op.kind)))
                });
                if let Some(kind) = merged {
                    if is_identity_rotation(angle(&kind)) {
                        slots[prev] = None;
                        history[q].pop();
                    } else {
                        slots[prev].as_mut().unwrap().kind = kind;
                    }
                    continue;
                }
            }
        }
        let idx = slots.len();
        for &q in &op.qubits {
            history[q].push(idx);
        }
        slots.push(Some(op));
    }
    slots.into_iter().flatten().collect()
}

/// Replaces every `Rzz(θ)` by `CX, Rz(θ), CX`; everything else is kept.
pub fn lower_rzz(circuit: &Circuit) -> Circuit {
    let mut ops = Vec::with_capacity(circuit.ops.len());
    for op in &circuit.ops {
        if let GateKind::Rzz(theta) = op.kind {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            for mut g in [GateOp::cx(a, b), GateOp::rz(theta, b), GateOp::cx(a, b)] {
                g.condition = op.condition;
                ops.push(g);
            }
        } else {
            ops.push(op.clone());
        }
    }
    Circuit {
        ops,
        ..circuit.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_gateset() {
        assert_eq!("rzz".parse::<Gateset>().unwrap(), Gateset::RzzSet);
        assert_eq!("CX".parse::<Gateset>().unwrap(), Gateset::CxSet);
        assert!(matches!("u3".parse::<Gateset>(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn output_in_gateset() {
        let mut c = Circuit::new(3, 1);
        for op in [
            GateOp::h(0),
            GateOp::x(1),
            GateOp::one(GateKind::T, 2),
            GateOp::cx(0, 1),
            GateOp::cz(1, 2),
            GateOp::rzz(0.3, 0, 2),
            GateOp::measure(2, 0),
            GateOp::cz(0, 1).when(0),
        ] {
            c.push(op);
        }
        for gs in [Gateset::RzzSet, Gateset::CxSet] {
            let t = transpile(&c, gs);
            assert!(t.ops.iter().all(|o| gs.contains(&o.kind)), "{gs}");
            t.validate().unwrap();
        }
    }

    #[test]
    fn cx_becomes_one_rzz() {
        let mut c = Circuit::new(2, 0);
        c.push(GateOp::cx(0, 1));
        let t = transpile(&c, Gateset::RzzSet);
        let rzz: Vec<_> = t
            .ops
            .iter()
            .filter(|o| o.kind.is_two_qubit())
            .map(|o| o.kind)
            .collect();
        assert_eq!(rzz, vec![GateKind::Rzz(FRAC_PI_2)]);
    }

    #[test]
    fn rzz_becomes_cx_rz_cx() {
        let mut c = Circuit::new(2, 0);
        c.push(GateOp::rzz(0.7, 0, 1));
        let t = transpile(&c, Gateset::CxSet);
        assert_eq!(
            t.ops,
            vec![GateOp::cx(0, 1), GateOp::rz(0.7, 1), GateOp::cx(0, 1)]
        );
    }

    #[test]
    fn fusion_cancels_double_x() {
        let mut c = Circuit::new(1, 0);
        c.push(GateOp::rz(0.1, 0));
        c.push(GateOp::x(0));
        c.push(GateOp::x(0));
        c.push(GateOp::rz(0.2, 0));
        let t = transpile(&c, Gateset::RzzSet);
        assert_eq!(t.ops.len(), 1);
        assert!(matches!(t.ops[0].kind, GateKind::Rz(a) if (a - 0.3).abs() < 1e-15));
    }

    #[test]
    fn conditioned_gates_not_fused() {
        let mut c = Circuit::new(2, 1);
        c.push(GateOp::measure(1, 0));
        c.push(GateOp::rz(0.1, 0));
        c.push(GateOp::z(0).when(0));
        let t = transpile(&c, Gateset::RzzSet);
        assert_eq!(t.ops.len(), 3);
        assert_eq!(t.ops[2].condition, Some(0));
    }
}
