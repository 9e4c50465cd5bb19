//! Exact statevector simulation with mid-circuit measurement, reset and
//! classical feed-forward.
//!
//! Qubit `q` is bit `q` of the basis-state index (qubit 0 is least
//! significant). Printed bitstrings are most-significant first, so qubit 0 is
//! the rightmost character.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, GateOp};
use crate::error::{Error, Result};
use crate::sat::{Assignment, KSatInstance};

pub const DEFAULT_MAX_QUBITS: usize = 24;
const NORM_TOLERANCE: f64 = 1e-9;

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
    classical_bits: Vec<bool>,
}

impl Statevector {
    /// `|0…0⟩` with `num_clbits` classical bits cleared.
    pub fn zero(num_qubits: usize, num_clbits: usize) -> Self {
        Self::basis(num_qubits, num_clbits, 0)
    }

    pub fn basis(num_qubits: usize, num_clbits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
            classical_bits: vec![false; num_clbits],
        }
    }

    /// `|+⟩^{⊗n}`
    pub fn uniform(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let a = (dim as f64).sqrt().recip();
        Self {
            num_qubits,
            amplitudes: vec![Complex64::new(a, 0.0); dim],
            classical_bits: Vec::new(),
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidParameters(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
            classical_bits: Vec::new(),
        })
    }

    /// Same state with `num_clbits` cleared classical bits.
    pub fn with_clbits(mut self, num_clbits: usize) -> Self {
        self.classical_bits = vec![false; num_clbits];
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn classical_bits(&self) -> &[bool] {
        &self.classical_bits
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal distribution over the low `bits` qubits.
    pub fn marginal_probabilities(&self, bits: usize) -> Vec<f64> {
        let mask = (1usize << bits) - 1;
        let mut out = vec![0.0; 1 << bits];
        for (i, a) in self.amplitudes.iter().enumerate() {
            out[i & mask] += a.norm_sqr();
        }
        out
    }

    /// `Σ_x |amp(x)|² C(x)` with `x` read from the low `instance.n()` qubits.
    pub fn expectation(&self, instance: &KSatInstance) -> f64 {
        let n = instance.n();
        self.marginal_probabilities(n)
            .iter()
            .enumerate()
            .map(|(x, p)| p * instance.evaluate_index(x as u64) as f64)
            .sum()
    }

    /// Little-endian `(re, im)` f64 pairs, one per amplitude.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        for a in &self.amplitudes {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::parse(0, "state dump length is not a multiple of 16"));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|ch| {
                let re = f64::from_le_bytes(ch[..8].try_into().unwrap());
                let im = f64::from_le_bytes(ch[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    fn apply_matrix(&mut self, q: usize, m: &Mat2) {
        let bit = 1usize << q;
        for base in (0..self.amplitudes.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | bit];
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_diagonal(&mut self, q: usize, d0: Complex64, d1: Complex64) {
        let bit = 1usize << q;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & bit == 0 { d0 } else { d1 };
        }
    }

    fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for base in (0..self.amplitudes.len()).step_by(bit << 1) {
            for i in base..base + bit {
                self.amplitudes.swap(i, i | bit);
            }
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amplitudes.swap(i, i | tb);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    fn apply_rzz(&mut self, a: usize, b: usize, theta: f64) {
        let even = Complex64::from_polar(1.0, -theta / 2.0);
        let odd = even.conj();
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            let parity = ((i >> a) ^ (i >> b)) & 1;
            *amp *= if parity == 0 { even } else { odd };
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes by the norm of
    /// what survives.
    fn collapse(&mut self, q: usize, outcome: bool) {
        let bit = 1usize << q;
        let mut kept = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                kept += a.norm_sqr();
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        let scale = kept.sqrt().recip();
        for a in self.amplitudes.iter_mut() {
            *a *= scale;
        }
    }

    /// Applies a unitary gate, ignoring any classical condition.
    pub fn apply_unitary(&mut self, kind: GateKind, qubits: &[usize]) -> Result<()> {
        use std::f64::consts::FRAC_1_SQRT_2 as R;
        let q = qubits[0];
        match kind {
            GateKind::H => self.apply_matrix(q, &[[c(R, 0.0), c(R, 0.0)], [c(R, 0.0), c(-R, 0.0)]]),
            GateKind::X => self.apply_x(q),
            GateKind::Z => self.apply_diagonal(q, c(1.0, 0.0), c(-1.0, 0.0)),
            GateKind::S => self.apply_diagonal(q, c(1.0, 0.0), c(0.0, 1.0)),
            GateKind::Sdg => self.apply_diagonal(q, c(1.0, 0.0), c(0.0, -1.0)),
            GateKind::T => self.apply_diagonal(q, c(1.0, 0.0), c(R, R)),
            GateKind::Tdg => self.apply_diagonal(q, c(1.0, 0.0), c(R, -R)),
            GateKind::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                self.apply_matrix(q, &[[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
            }
            GateKind::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                self.apply_matrix(q, &[[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
            }
            GateKind::Rz(t) => {
                let d = Complex64::from_polar(1.0, -t / 2.0);
                self.apply_diagonal(q, d, d.conj())
            }
            GateKind::Rzz(t) => self.apply_rzz(q, qubits[1], t),
            GateKind::Cx => self.apply_cx(q, qubits[1]),
            GateKind::Cz => self.apply_cz(q, qubits[1]),
            GateKind::Measure(_) | GateKind::Reset => {
                return Err(Error::InvalidParameters(format!(
                    "{} is not unitary",
                    kind.name()
                )))
            }
        }
        Ok(())
    }

    /// Applies one op of a circuit. Measurements draw from `ctx` and write
    /// the classical register; a conditioned gate acts only when its bit is 1.
    pub fn apply_gate(&mut self, op: &GateOp, ctx: &mut MeasureContext<'_>) -> Result<()> {
        if let Some(&q) = op.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::InvalidCircuit(format!("qubit {q} out of range")));
        }
        if let Some(bit) = op.condition {
            match self.classical_bits.get(bit) {
                Some(true) => {}
                Some(false) => return Ok(()),
                None => {
                    return Err(Error::InvalidCircuit(format!("condition bit {bit} undefined")))
                }
            }
        }
        let q = op.qubits[0];
        match op.kind {
            GateKind::Measure(bit) => {
                if bit >= self.classical_bits.len() {
                    return Err(Error::InvalidCircuit(format!("classical bit {bit} out of range")));
                }
                let p1 = self.prob_one(q);
                let outcome = ctx.outcome(p1)?;
                self.collapse(q, outcome);
                self.classical_bits[bit] = outcome;
            }
            GateKind::Reset => {
                let p1 = self.prob_one(q);
                let one = if p1 < 1e-15 {
                    false
                } else if p1 > 1.0 - 1e-15 {
                    true
                } else {
                    ctx.rng.random::<f64>() < p1
                };
                self.collapse(q, one);
                if one {
                    self.apply_x(q);
                }
            }
            kind => {
                self.apply_unitary(kind, &op.qubits)?;
                if ctx.check_norm {
                    let drift = (self.norm_sqr() - 1.0).abs();
                    if drift > NORM_TOLERANCE {
                        return Err(Error::NumericalFailure(format!(
                            "norm drift {drift:e} after {}",
                            kind.name()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// How mid-circuit measurement outcomes are chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BranchMode {
    /// Born-rule sampling from the run's RNG.
    #[default]
    Born,
    /// Every mid-circuit measurement reports this outcome.
    ForceAll(bool),
    /// The i-th mid-circuit measurement reports `outcomes[i]`; later ones
    /// fall back to the Born rule.
    Force(Vec<bool>),
}

pub struct MeasureContext<'a> {
    rng: &'a mut ChaCha8Rng,
    forced: Option<&'a BranchMode>,
    counter: usize,
    check_norm: bool,
}

impl<'a> MeasureContext<'a> {
    pub fn born(rng: &'a mut ChaCha8Rng) -> Self {
        Self {
            rng,
            forced: None,
            counter: 0,
            check_norm: true,
        }
    }

    /// Outcomes chosen by `mode`; `Born` and exhausted `Force` lists draw
    /// from `rng`.
    pub fn forcing(rng: &'a mut ChaCha8Rng, mode: &'a BranchMode) -> Self {
        Self {
            rng,
            forced: Some(mode),
            counter: 0,
            check_norm: true,
        }
    }

    fn outcome(&mut self, p1: f64) -> Result<bool> {
        let forced = match self.forced {
            Some(BranchMode::ForceAll(b)) => Some(*b),
            Some(BranchMode::Force(v)) => v.get(self.counter).copied(),
            _ => None,
        };
        self.counter += 1;
        match forced {
            Some(b) => {
                let p = if b { p1 } else { 1.0 - p1 };
                if p < 1e-12 {
                    return Err(Error::NumericalFailure(format!(
                        "forced outcome {} has probability {p:e}",
                        b as u8
                    )));
                }
                Ok(b)
            }
            None => Ok(self.rng.random::<f64>() < p1),
        }
    }
}

/// One shot: terminal outcomes of the variable qubits plus every other
/// classical bit (mid-circuit ancilla outcomes), and the seed that replays it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub bitstring: Assignment,
    pub ancilla_outcomes: Vec<bool>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Simulator {
    pub max_qubits: usize,
    pub branch: BranchMode,
    pub check_norm: bool,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
            branch: BranchMode::Born,
            check_norm: true,
        }
    }
}

impl Simulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn forcing(branch: BranchMode) -> Self {
        Self {
            branch,
            ..Self::default()
        }
    }

    fn check_width(&self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits > self.max_qubits {
            return Err(Error::TooLarge {
                what: "circuit width",
                size: circuit.num_qubits,
                limit: self.max_qubits,
            });
        }
        Ok(())
    }

    fn execute(&self, circuit: &Circuit, ops: &[GateOp], seed: u64) -> Result<Statevector> {
        self.check_width(circuit)?;
        let mut state = Statevector::zero(circuit.num_qubits, circuit.num_clbits);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ctx = MeasureContext {
            rng: &mut rng,
            forced: match self.branch {
                BranchMode::Born => None,
                ref b => Some(b),
            },
            counter: 0,
            check_norm: self.check_norm,
        };
        let terminal = circuit.terminal_start();
        for (i, op) in ops.iter().enumerate() {
            if i == terminal {
                // the terminal block is always sampled
                ctx.forced = None;
            }
            state.apply_gate(op, &mut ctx)?;
        }
        Ok(state)
    }

    /// State just before the terminal measurement block; mid-circuit
    /// operations are applied according to `self.branch`.
    pub fn run_to_terminal(&self, circuit: &Circuit, seed: u64) -> Result<Statevector> {
        self.execute(circuit, &circuit.ops[..circuit.terminal_start()], seed)
    }

    /// Runs every op including the terminal measurement.
    pub fn run(&self, circuit: &Circuit, seed: u64) -> Result<(Statevector, ShotRecord)> {
        let state = self.execute(circuit, &circuit.ops, seed)?;
        let shot = shot_from_bits(circuit, state.classical_bits(), seed);
        Ok((state, shot))
    }

    /// `shots` independent shots. Per-shot seeds are drawn from `seed`. When
    /// the circuit has no mid-circuit operations the state is simulated once
    /// and the terminal distribution is sampled directly.
    pub fn sample(&self, circuit: &Circuit, shots: usize, seed: u64) -> Result<Vec<ShotRecord>> {
        self.check_width(circuit)?;
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..shots).map(|_| master.next_u64()).collect();
        if shots == 0 {
            return Ok(Vec::new());
        }
        if !circuit.has_mid_circuit_ops() {
            let state = self.run_to_terminal(circuit, seed)?;
            let dist = WeightedIndex::new(state.probabilities())
                .map_err(|e| Error::NumericalFailure(e.to_string()))?;
            let terminal: Vec<(usize, usize)> = circuit.ops[circuit.terminal_start()..]
                .iter()
                .filter_map(|op| match op.kind {
                    GateKind::Measure(b) => Some((op.qubits[0], b)),
                    _ => None,
                })
                .collect();
            return Ok(seeds
                .into_iter()
                .map(|s| {
                    let x = dist.sample(&mut ChaCha8Rng::seed_from_u64(s));
                    let mut bits = state.classical_bits().to_vec();
                    for &(q, b) in &terminal {
                        bits[b] = (x >> q) & 1 == 1;
                    }
                    shot_from_bits(circuit, &bits, s)
                })
                .collect());
        }
        seeds
            .into_par_iter()
            .map(|s| self.run(circuit, s).map(|(_, shot)| shot))
            .collect()
    }
}

fn shot_from_bits(circuit: &Circuit, bits: &[bool], seed: u64) -> ShotRecord {
    let n = circuit.metadata.data_qubits.min(bits.len());
    ShotRecord {
        bitstring: Assignment::new(bits[..n].to_vec()),
        ancilla_outcomes: bits[n..].to_vec(),
        seed,
    }
}

/// `⟨H_C⟩` of the pre-measurement state, simulated gate by gate. Mid-circuit
/// measurements are forced to outcome 0.
pub fn exact_expectation_gate_level(circuit: &Circuit, instance: &KSatInstance) -> Result<f64> {
    if circuit.metadata.data_qubits != instance.n() {
        return Err(Error::InvalidParameters(format!(
            "circuit has {} data qubits, instance has {} variables",
            circuit.metadata.data_qubits,
            instance.n()
        )));
    }
    let state = Simulator::forcing(BranchMode::ForceAll(false)).run_to_terminal(circuit, 0)?;
    Ok(state.expectation(instance))
}

/// Column-major dense unitary of a circuit made only of unitary gates.
pub fn dense_unitary(circuit: &Circuit) -> Result<Vec<Vec<Complex64>>> {
    if circuit.ops.iter().any(|op| !op.kind.is_unitary() || op.condition.is_some()) {
        return Err(Error::InvalidParameters(
            "dense unitary requires a circuit of unconditioned unitary gates".into(),
        ));
    }
    let dim = 1usize << circuit.num_qubits;
    (0..dim)
        .map(|x| {
            let mut s = Statevector::basis(circuit.num_qubits, 0, x);
            for op in &circuit.ops {
                s.apply_unitary(op.kind, &op.qubits)?;
            }
            Ok(s.amplitudes)
        })
        .collect()
}

fn bits_msb_first(bits: &[bool]) -> String {
    bits.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits_msb_first(s: &str, line: usize) -> Result<Vec<bool>> {
    s.chars()
        .rev()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::parse(line, format!("bad bit {other:?}"))),
        })
        .collect()
}

/// One line of the shots JSON-lines format. `bitstring` is printed with
/// variable `n-1` first and variable 0 last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub bitstring: String,
    #[serde(default)]
    pub ancilla_outcomes: String,
    #[serde(default)]
    pub seed: u64,
}

impl ShotLine {
    pub fn new(shot: &ShotRecord, p: Option<usize>) -> Self {
        Self {
            p,
            bitstring: bits_msb_first(&shot.bitstring.bits),
            ancilla_outcomes: bits_msb_first(&shot.ancilla_outcomes),
            seed: shot.seed,
        }
    }

    pub fn to_record(&self, line: usize) -> Result<ShotRecord> {
        Ok(ShotRecord {
            bitstring: Assignment::new(parse_bits_msb_first(&self.bitstring, line)?),
            ancilla_outcomes: parse_bits_msb_first(&self.ancilla_outcomes, line)?,
            seed: self.seed,
        })
    }
}

pub fn write_shots_jsonl<W: Write>(mut w: W, shots: &[ShotRecord], p: Option<usize>) -> Result<()> {
    for shot in shots {
        serde_json::to_writer(&mut w, &ShotLine::new(shot, p))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads shot lines, returning each record with its optional round tag.
pub fn read_shots_jsonl<R: BufRead>(r: R) -> Result<Vec<(Option<usize>, ShotRecord)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ShotLine =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        out.push((parsed.p, parsed.to_record(i + 1)?));
    }
    Ok(out)
}
