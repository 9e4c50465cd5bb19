#![allow(dead_code)]

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qsat_core::{Clause, Literal};

pub fn random_clause(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Clause {
    let vars = index::sample(rng, n, k);
    Clause::new(
        vars.iter()
            .map(|v| Literal {
                variable: v,
                negated: rng.random_bool(0.5),
            })
            .collect(),
    )
    .unwrap()
}

/// `e^{-iγ C_j(x)}` over the `2^n` assignments.
pub fn clause_oracle(clause: &Clause, n: usize, gamma: f64) -> Vec<Complex64> {
    (0..1u64 << n)
        .map(|x| {
            let c = clause.is_satisfied_by_index(x) as u8 as f64;
            Complex64::from_polar(1.0, -gamma * c)
        })
        .collect()
}

/// Max elementwise distance after rotating `a` onto `b` by one global phase.
pub fn aligned_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (i, _) = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .unwrap();
    let phase = if a[i].norm() < 1e-14 {
        Complex64::new(1.0, 0.0)
    } else {
        let r = b[i] / a[i];
        r / r.norm()
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn bare_circuit(
    num_qubits: usize,
    num_clbits: usize,
    ops: Vec<qsat_core::GateOp>,
) -> qsat_core::Circuit {
    let mut c = qsat_core::Circuit::new(num_qubits, num_clbits);
    c.ops = ops;
    c.validate().unwrap();
    c
}
