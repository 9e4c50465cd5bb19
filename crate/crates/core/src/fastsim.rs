//! Direct QAOA evolution: the cost Hamiltonian is diagonal, so a phase
//! separator is an elementwise phase, and the transverse-field mixer
//! factorizes into one `exp(-iβX)` butterfly pass per qubit.
//!
//! Gradients use an adjoint backward sweep; [`finite_difference_gradient`]
//! is kept as an independent check.

use num_complex::Complex64;

use crate::circuit::AngleSchedule;
use crate::error::{Error, Result};
use crate::sat::KSatInstance;
use crate::sim::{Statevector, DEFAULT_MAX_QUBITS};

/// `values[x] = C(x)` for every packed assignment `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    n: usize,
    m: usize,
    values: Vec<u16>,
}

impl CostTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn max(&self) -> u16 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| v as f64).sum::<f64>() / self.values.len() as f64
    }

    /// `e^{-iγc}` for `c = 0..=m`.
    fn phase_table(&self, gamma: f64) -> Vec<Complex64> {
        (0..=self.m)
            .map(|c| Complex64::from_polar(1.0, -gamma * c as f64))
            .collect()
    }
}

pub fn cost_table(instance: &KSatInstance) -> Result<CostTable> {
    cost_table_with_limit(instance, DEFAULT_MAX_QUBITS)
}

/// Starts from `m` everywhere and subtracts one on each clause's `2^{n-k}`
/// falsifying assignments, enumerated as submasks of the free variables.
pub fn cost_table_with_limit(instance: &KSatInstance, limit: usize) -> Result<CostTable> {
    let n = instance.n();
    if n > limit {
        return Err(Error::TooLarge {
            what: "cost table variable count",
            size: n,
            limit,
        });
    }
    let m = instance.m();
    if m > u16::MAX as usize {
        return Err(Error::TooLarge {
            what: "clause count",
            size: m,
            limit: u16::MAX as usize,
        });
    }
    let full = (1u64 << n) - 1;
    let mut values = vec![m as u16; 1 << n];
    for clause in instance.clauses() {
        let free = full & !clause.mask();
        let fixed = clause.unsat_bits();
        let mut sub = free;
        loop {
            values[(sub | fixed) as usize] -= 1;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    Ok(CostTable { n, m, values })
}

fn apply_phase(amps: &mut [Complex64], values: &[u16], table: &[Complex64]) {
    for (a, &v) in amps.iter_mut().zip(values) {
        *a *= table[v as usize];
    }
}

/// `exp(-iβ Σ X_q)` as `n` butterfly passes.
fn apply_mixer(amps: &mut [Complex64], n: usize, beta: f64) {
    let (s, c) = beta.sin_cos();
    let mis = Complex64::new(0.0, -s);
    for q in 0..n {
        let bit = 1usize << q;
        for base in (0..amps.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let a = amps[i];
                let b = amps[i | bit];
                amps[i] = a * c + b * mis;
                amps[i | bit] = a * mis + b * c;
            }
        }
    }
}

/// `(H_M ψ)[x] = Σ_q ψ[x ⊕ 2^q]`
fn apply_transverse_field(amps: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (x, o) in out.iter_mut().enumerate() {
        for q in 0..n {
            *o += amps[x ^ (1 << q)];
        }
    }
    out
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Evaluator bound to one instance; caches the cost table.
#[derive(Debug, Clone)]
pub struct QaoaEvaluator {
    table: CostTable,
}

impl QaoaEvaluator {
    pub fn new(instance: &KSatInstance) -> Result<Self> {
        Ok(Self {
            table: cost_table(instance)?,
        })
    }

    pub fn from_table(table: CostTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &CostTable {
        &self.table
    }

    pub fn state(&self, angles: &AngleSchedule) -> Statevector {
        let n = self.table.n;
        let mut state = Statevector::uniform(n);
        let amps = state.amplitudes_mut();
        for (&g, &b) in angles.gammas().iter().zip(angles.betas()) {
            apply_phase(amps, &self.table.values, &self.table.phase_table(g));
            apply_mixer(amps, n, b);
        }
        state
    }

    fn expectation_of(&self, amps: &[Complex64]) -> f64 {
        amps.iter()
            .zip(&self.table.values)
            .map(|(a, &v)| a.norm_sqr() * v as f64)
            .sum()
    }

    pub fn expectation(&self, angles: &AngleSchedule) -> f64 {
        self.expectation_of(self.state(angles).amplitudes())
    }

    /// Expectation and its gradient `[∂/∂γ_1..∂/∂γ_p, ∂/∂β_1..∂/∂β_p]` from
    /// one forward pass and one adjoint backward pass.
    pub fn value_and_gradient(&self, angles: &AngleSchedule) -> (f64, Vec<f64>) {
        let n = self.table.n;
        let p = angles.p();
        let values = &self.table.values;
        let forward = self.state(angles);
        let value = self.expectation_of(forward.amplitudes());

        let mut psi = forward.amplitudes().to_vec();
        let mut lambda: Vec<Complex64> = psi
            .iter()
            .zip(values)
            .map(|(a, &v)| a * v as f64)
            .collect();
        let mut grad = vec![0.0; 2 * p];
        for r in (0..p).rev() {
            let (g, b) = (angles.gammas()[r], angles.betas()[r]);
            // ψ is the state after round r
            let hm_psi = apply_transverse_field(&psi, n);
            grad[p + r] = 2.0 * inner(&lambda, &hm_psi).im;
            apply_mixer(&mut psi, n, -b);
            apply_mixer(&mut lambda, n, -b);
            let c_psi: Vec<Complex64> = psi.iter().zip(values).map(|(a, &v)| a * v as f64).collect();
            grad[r] = 2.0 * inner(&lambda, &c_psi).im;
            let undo = self.table.phase_table(-g);
            apply_phase(&mut psi, values, &undo);
            apply_phase(&mut lambda, values, &undo);
        }
        (value, grad)
    }

    pub fn gradient(&self, angles: &AngleSchedule) -> Vec<f64> {
        self.value_and_gradient(angles).1
    }

    /// Output distribution over assignments.
    pub fn distribution(&self, angles: &AngleSchedule) -> Vec<f64> {
        self.state(angles).probabilities()
    }
}

pub fn qaoa_state(instance: &KSatInstance, angles: &AngleSchedule) -> Result<Statevector> {
    Ok(QaoaEvaluator::new(instance)?.state(angles))
}

pub fn expectation(instance: &KSatInstance, angles: &AngleSchedule) -> Result<f64> {
    Ok(QaoaEvaluator::new(instance)?.expectation(angles))
}

pub fn gradient(instance: &KSatInstance, angles: &AngleSchedule) -> Result<Vec<f64>> {
    Ok(QaoaEvaluator::new(instance)?.gradient(angles))
}

/// Central differences with step `h` on every angle.
pub fn finite_difference_gradient(eval: &QaoaEvaluator, angles: &AngleSchedule, h: f64) -> Vec<f64> {
    let flat = angles.to_flat();
    (0..flat.len())
        .map(|i| {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[i] += h;
            minus[i] -= h;
            let f = |v: &[f64]| eval.expectation(&AngleSchedule::from_flat(v).unwrap());
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}
