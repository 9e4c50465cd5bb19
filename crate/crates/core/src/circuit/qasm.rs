//! OpenQASM export and a reader for the subset this crate emits.
//!
//! QASM 2.0 output is only produced for circuits without mid-circuit
//! measurement; `rzz` is lowered to `cx; rz; cx`. QASM 3.0 output keeps
//! `rzz` as a declared gate and expresses feed-forward as `if (c[i]) ...`.
//! A `// qsat ...` comment line carries circuit metadata through a round trip.

use std::fmt::Write;

use super::{lower_rzz, Circuit, CircuitMetadata, GateKind, GateOp};
use crate::error::{Error, Result};

fn metadata_line(c: &Circuit) -> String {
    let m = &c.metadata;
    let mut s = format!("// qsat data_qubits={}", m.data_qubits);
    if let Some(p) = m.p {
        write!(s, " p={p}").unwrap();
    }
    if let Some(id) = &m.instance_id {
        write!(s, " instance={id}").unwrap();
    }
    if let Some(id) = &m.angles_id {
        write!(s, " angles={id}").unwrap();
    }
    s
}

fn gate_text(op: &GateOp) -> String {
    let q = |i: usize| format!("q[{}]", op.qubits[i]);
    match op.kind {
        GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) => {
            format!("{}({t}) {}", op.kind.name(), q(0))
        }
        GateKind::Rzz(t) => format!("rzz({t}) {}, {}", q(0), q(1)),
        GateKind::Cx | GateKind::Cz => format!("{} {}, {}", op.kind.name(), q(0), q(1)),
        GateKind::Reset => format!("reset {}", q(0)),
        _ => format!("{} {}", op.kind.name(), q(0)),
    }
}

/// OpenQASM 2.0 text. Fails for circuits with mid-circuit measurement,
/// reset or classical conditions.
pub fn emit_qasm2(circuit: &Circuit) -> Result<String> {
    if circuit.has_mid_circuit_ops() {
        return Err(Error::Unsupported(
            "feed-forward requires QASM3 (circuit has mid-circuit measurement)".into(),
        ));
    }
    let c = lower_rzz(circuit);
    let mut s = String::new();
    writeln!(s, "OPENQASM 2.0;").unwrap();
    writeln!(s, "include \"qelib1.inc\";").unwrap();
    writeln!(s, "{}", metadata_line(&c)).unwrap();
    writeln!(s, "qreg q[{}];", c.num_qubits).unwrap();
    writeln!(s, "creg c[{}];", c.num_clbits).unwrap();
    for op in &c.ops {
        match op.kind {
            GateKind::Measure(b) => writeln!(s, "measure q[{}] -> c[{b}];", op.qubits[0]),
            _ => writeln!(s, "{};", gate_text(op)),
        }
        .unwrap();
    }
    Ok(s)
}

/// OpenQASM 3.0 text with mid-circuit measurement, reset and `if` conditions.
pub fn emit_qasm3(circuit: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "OPENQASM 3.0;").unwrap();
    writeln!(s, "include \"stdgates.inc\";").unwrap();
    writeln!(s, "{}", metadata_line(circuit)).unwrap();
    writeln!(s, "gate rzz(theta) a, b {{ cx a, b; rz(theta) b; cx a, b; }}").unwrap();
    writeln!(s, "qubit[{}] q;", circuit.num_qubits).unwrap();
    writeln!(s, "bit[{}] c;", circuit.num_clbits).unwrap();
    for op in &circuit.ops {
        if let Some(b) = op.condition {
            write!(s, "if (c[{b}]) ").unwrap();
        }
        match op.kind {
            GateKind::Measure(b) => writeln!(s, "c[{b}] = measure q[{}];", op.qubits[0]),
            _ => writeln!(s, "{};", gate_text(op)),
        }
        .unwrap();
    }
    s
}

struct Reader {
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
    ops: Vec<GateOp>,
}

/// Parses QASM 2.0 or 3.0 text in the subset produced by [`emit_qasm2`] and
/// [`emit_qasm3`]. Custom `gate` definitions are skipped; `rzz` is treated
/// as a primitive.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut metadata = CircuitMetadata::default();
    let mut data_qubits = None;
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        let (code, comment) = match line.find("//") {
            Some(i) => (&line[..i], Some(&line[i + 2..])),
            None => (line, None),
        };
        if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("qsat")) {
            for kv in rest.split_whitespace() {
                match kv.split_once('=') {
                    Some(("data_qubits", v)) => data_qubits = v.parse().ok(),
                    Some(("p", v)) => metadata.p = v.parse().ok(),
                    Some(("instance", v)) => metadata.instance_id = Some(v.to_string()),
                    Some(("angles", v)) => metadata.angles_id = Some(v.to_string()),
                    _ => {}
                }
            }
        }
        body.push_str(code);
        body.push('\n');
    }

    let mut reader = Reader {
        qreg: None,
        creg: None,
        ops: Vec::new(),
    };
    let mut rest = body.as_str();
    let mut index = 0;
    while !rest.trim().is_empty() {
        index += 1;
        let trimmed = rest.trim_start();
        if trimmed.starts_with("gate ") || trimmed.starts_with("gate\t") {
            let end = trimmed
                .find('}')
                .ok_or_else(|| Error::parse(index, "unterminated gate definition"))?;
            rest = &trimmed[end + 1..];
            continue;
        }
        let end = trimmed
            .find(';')
            .ok_or_else(|| Error::parse(index, "missing ';'"))?;
        reader.statement(trimmed[..end].trim(), index)?;
        rest = &trimmed[end + 1..];
    }

    let (_, nq) = reader
        .qreg
        .ok_or_else(|| Error::parse(0, "no quantum register declared"))?;
    let nc = reader.creg.map(|(_, n)| n).unwrap_or(0);
    metadata.data_qubits = data_qubits.unwrap_or(nq);
    Circuit::from_ops(nq, nc, reader.ops, metadata)
}

impl Reader {
    fn statement(&mut self, stmt: &str, line: usize) -> Result<()> {
        let err = |msg: String| Error::parse(line, msg);
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") {
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            self.qreg = Some(declaration2(rest).ok_or_else(|| err(format!("bad qreg {stmt:?}")))?);
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("creg") {
            self.creg = Some(declaration2(rest).ok_or_else(|| err(format!("bad creg {stmt:?}")))?);
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("qubit") {
            self.qreg = Some(declaration3(rest).ok_or_else(|| err(format!("bad qubit decl {stmt:?}")))?);
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("bit") {
            self.creg = Some(declaration3(rest).ok_or_else(|| err(format!("bad bit decl {stmt:?}")))?);
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("if") {
            let rest = rest.trim_start();
            let close = rest
                .find(')')
                .filter(|_| rest.starts_with('('))
                .ok_or_else(|| err(format!("bad condition {stmt:?}")))?;
            let cond = rest[1..close].trim();
            let cond = cond
                .strip_suffix("== 1")
                .or_else(|| cond.strip_suffix("==1"))
                .unwrap_or(cond)
                .trim();
            let bit = self.clbit(cond, line)?;
            let before = self.ops.len();
            self.statement(rest[close + 1..].trim(), line)?;
            if self.ops.len() != before + 1 {
                return Err(err("condition must guard exactly one gate".into()));
            }
            self.ops.last_mut().unwrap().condition = Some(bit);
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("measure") {
            let (q, c) = rest
                .split_once("->")
                .ok_or_else(|| err(format!("bad measure {stmt:?}")))?;
            let q = self.qubit(q.trim(), line)?;
            let c = self.clbit(c.trim(), line)?;
            self.ops.push(GateOp::measure(q, c));
            return Ok(());
        }
        if let Some((lhs, rhs)) = stmt.split_once('=') {
            let q = rhs
                .trim()
                .strip_prefix("measure")
                .ok_or_else(|| err(format!("unsupported assignment {stmt:?}")))?;
            let q = self.qubit(q.trim(), line)?;
            let c = self.clbit(lhs.trim(), line)?;
            self.ops.push(GateOp::measure(q, c));
            return Ok(());
        }

        // gate application: name[(param)] args
        let (head, args) = match stmt.find(')') {
            Some(i) if stmt[..i].contains('(') => (&stmt[..=i], &stmt[i + 1..]),
            _ => stmt
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(format!("cannot parse {stmt:?}")))?,
        };
        let (name, param) = match head.split_once('(') {
            Some((n, p)) => (n.trim(), Some(eval_expr(p.trim_end_matches(')'), line)?)),
            None => (head.trim(), None),
        };
        let qubits = args
            .split(',')
            .map(|a| self.qubit(a.trim(), line))
            .collect::<Result<Vec<_>>>()?;
        let need_param = |p: Option<f64>| p.ok_or_else(|| err(format!("{name} needs an angle")));
        let kind = match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "rx" => GateKind::Rx(need_param(param)?),
            "ry" => GateKind::Ry(need_param(param)?),
            "rz" => GateKind::Rz(need_param(param)?),
            "rzz" => GateKind::Rzz(need_param(param)?),
            "cx" | "CX" => GateKind::Cx,
            "cz" => GateKind::Cz,
            "reset" => GateKind::Reset,
            other => return Err(err(format!("unsupported gate {other:?}"))),
        };
        if qubits.len() != kind.arity() {
            return Err(err(format!("{name} takes {} qubits", kind.arity())));
        }
        self.ops.push(GateOp {
            kind,
            qubits,
            condition: None,
        });
        Ok(())
    }

    fn qubit(&self, s: &str, line: usize) -> Result<usize> {
        let name = self.qreg.as_ref().map(|(n, _)| n.as_str());
        indexed(s, name).ok_or_else(|| Error::parse(line, format!("bad qubit reference {s:?}")))
    }

    fn clbit(&self, s: &str, line: usize) -> Result<usize> {
        let name = self.creg.as_ref().map(|(n, _)| n.as_str());
        indexed(s, name).ok_or_else(|| Error::parse(line, format!("bad bit reference {s:?}")))
    }
}

/// `name[i]` against an expected register name.
fn indexed(s: &str, reg: Option<&str>) -> Option<usize> {
    let (name, rest) = s.split_once('[')?;
    if Some(name.trim()) != reg {
        return None;
    }
    rest.strip_suffix(']')?.trim().parse().ok()
}

/// QASM2 `q[5]`
fn declaration2(s: &str) -> Option<(String, usize)> {
    let (name, rest) = s.trim().split_once('[')?;
    Some((name.trim().to_string(), rest.strip_suffix(']')?.trim().parse().ok()?))
}

/// QASM3 `[5] q`
fn declaration3(s: &str) -> Option<(String, usize)> {
    let rest = s.trim().strip_prefix('[')?;
    let (size, name) = rest.split_once(']')?;
    Some((name.trim().to_string(), size.trim().parse().ok()?))
}

/// Arithmetic over numbers and `pi` with `+ - * /` and parentheses.
fn eval_expr(src: &str, line: usize) -> Result<f64> {
    let mut p = ExprParser {
        s: src.as_bytes(),
        i: 0,
    };
    let v = p.sum();
    p.skip_ws();
    match v {
        Some(v) if p.i == p.s.len() => Ok(v),
        _ => Err(Error::parse(line, format!("bad expression {src:?}"))),
    }
}

struct ExprParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Option<f64> {
        let mut v = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.product()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Some(v)
    }

    fn product(&mut self) -> Option<f64> {
        let mut v = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.i += 1;
            let r = self.unary()?;
            v = if c == b'*' { v * r } else { v / r };
        }
        Some(v)
    }

    fn unary(&mut self) -> Option<f64> {
        match self.peek()? {
            b'-' => {
                self.i += 1;
                Some(-self.unary()?)
            }
            b'+' => {
                self.i += 1;
                self.unary()
            }
            b'(' => {
                self.i += 1;
                let v = self.sum()?;
                (self.peek()? == b')').then(|| self.i += 1)?;
                Some(v)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Option<f64> {
        self.skip_ws();
        let rest = &self.s[self.i..];
        if rest.starts_with(b"pi") {
            self.i += 2;
            return Some(std::f64::consts::PI);
        }
        let len = rest
            .iter()
            .enumerate()
            .take_while(|&(j, &c)| {
                c.is_ascii_digit()
                    || c == b'.'
                    || c == b'e'
                    || c == b'E'
                    || ((c == b'-' || c == b'+') && j > 0 && matches!(rest[j - 1], b'e' | b'E'))
            })
            .count();
        let v = std::str::from_utf8(&rest[..len]).ok()?.parse().ok()?;
        self.i += len;
        Some(v)
    }
}
