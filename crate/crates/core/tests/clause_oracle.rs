mod common;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{aligned_distance, bare_circuit, clause_oracle, random_clause, random_state};
use qsat_core::circuit::{build_qaoa_circuit, census, clause_phase_separator};
use qsat_core::sat::generate_random_ksat;
use qsat_core::sim::{dense_unitary, BranchMode, MeasureContext, Simulator, Statevector};
use qsat_core::{AngleSchedule, KSatInstance};

fn unitary_diagonal_distance(u: &[Vec<Complex64>], diag: &[Complex64]) -> f64 {
    let dim = diag.len();
    let mut off = 0.0f64;
    let mut d = Vec::with_capacity(dim);
    for (j, col) in u.iter().enumerate() {
        for (i, a) in col.iter().enumerate() {
            if i == j {
                d.push(*a);
            } else {
                off = off.max(a.norm());
            }
        }
    }
    off.max(aligned_distance(&d, diag))
}

#[test]
fn three_literal_clauses_match_diagonal_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..60 {
        let n = rng.random_range(3..=5);
        let clause = random_clause(&mut rng, n, 3);
        for _ in 0..20 {
            let gamma = rng.random_range(0.0..TAU);
            let ops = clause_phase_separator(&clause, gamma, &[], &[]).unwrap();
            let circ = bare_circuit(n, 0, ops);
            let u = dense_unitary(&circ).unwrap();
            let dist = unitary_diagonal_distance(&u, &clause_oracle(&clause, n, gamma));
            assert!(dist <= 1e-10, "{clause:?} γ={gamma}: {dist:e}");
        }
    }
}

#[test]
fn zero_angle_clause_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let clause = random_clause(&mut rng, 4, 3);
    let circ = bare_circuit(4, 0, clause_phase_separator(&clause, 0.0, &[], &[]).unwrap());
    let u = dense_unitary(&circ).unwrap();
    assert!(unitary_diagonal_distance(&u, &vec![Complex64::new(1.0, 0.0); 16]) < 1e-12);
}

/// Applies one width-`k` clause block to `input` on `n` data qubits with
/// every mid-circuit outcome dictated by `mode`; returns the data-qubit
/// state after the ancillas are reset.
fn run_branch(
    clause: &qsat_core::Clause,
    n: usize,
    gamma: f64,
    input: &[Complex64],
    mode: &BranchMode,
) -> Vec<Complex64> {
    let extra = clause.width() - 3;
    let ancillas: Vec<usize> = (n..n + extra).collect();
    let clbits: Vec<usize> = (0..extra).collect();
    let ops = clause_phase_separator(clause, gamma, &ancillas, &clbits).unwrap();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (n + extra)];
    amps[..input.len()].copy_from_slice(input);
    let mut state = Statevector::from_amplitudes(amps).unwrap().with_clbits(extra);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut ctx = MeasureContext::forcing(&mut rng, mode);
    for op in &ops {
        state.apply_gate(op, &mut ctx).unwrap();
    }
    let data = 1usize << n;
    let leak: f64 = state.amplitudes()[data..].iter().map(|a| a.norm_sqr()).sum();
    assert!(leak < 1e-20, "ancilla not returned to |0>: {leak:e}");
    state.amplitudes()[..data].to_vec()
}

fn check_branches(k: usize, clauses: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..clauses {
        let n = rng.random_range(k..=k + 1);
        let clause = random_clause(&mut rng, n, k);
        let gamma = rng.random_range(0.0..TAU);
        let oracle = clause_oracle(&clause, n, gamma);
        let mut modes = vec![BranchMode::ForceAll(false), BranchMode::ForceAll(true)];
        if k > 4 {
            modes.push(BranchMode::Force((0..k - 3).map(|i| i % 2 == 0).collect()));
        }
        for _ in 0..3 {
            let input = random_state(&mut rng, n);
            let want: Vec<Complex64> = input.iter().zip(&oracle).map(|(a, d)| a * d).collect();
            for mode in &modes {
                let got = run_branch(&clause, n, gamma, &input, mode);
                let dist = aligned_distance(&got, &want);
                assert!(dist <= 1e-10, "k={k} {mode:?} {clause:?}: {dist:e}");
            }
        }
    }
}

#[test]
fn four_literal_branches_match_oracle() {
    check_branches(4, 50, 7);
}

#[test]
fn wider_clause_branches_match_oracle() {
    check_branches(5, 10, 8);
    check_branches(6, 6, 9);
}

#[test]
fn zero_angle_k4_block_is_identity_on_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let clause = random_clause(&mut rng, 4, 4);
    let input = random_state(&mut rng, 4);
    for b in [false, true] {
        let got = run_branch(&clause, 4, 0.0, &input, &BranchMode::ForceAll(b));
        assert!(aligned_distance(&got, &input) < 1e-10);
    }
}

fn pre_measurement(inst: &KSatInstance, angles: &AngleSchedule) -> Vec<Complex64> {
    let circ = build_qaoa_circuit(inst, angles).unwrap();
    let state = Simulator::forcing(BranchMode::ForceAll(false))
        .run_to_terminal(&circ, 0)
        .unwrap();
    state.amplitudes().to_vec()
}

#[test]
fn clause_order_is_irrelevant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in [3, 4] {
        let inst = generate_random_ksat(5, k, 2.0, 40 + k as u64).unwrap();
        let angles = AngleSchedule::new(vec![0.7, 1.9], vec![0.3, 0.8]).unwrap();
        let base = pre_measurement(&inst, &angles);
        for _ in 0..3 {
            let mut clauses = inst.clauses().to_vec();
            for i in (1..clauses.len()).rev() {
                clauses.swap(i, rng.random_range(0..=i));
            }
            let shuffled = KSatInstance::new(inst.n(), k, clauses).unwrap();
            let other = pre_measurement(&shuffled, &angles);
            let probs = |v: &[Complex64]| v.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>();
            for (a, b) in probs(&base).iter().zip(probs(&other)) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(aligned_distance(&other, &base) < 1e-10);
        }
    }
}

#[test]
fn two_qubit_counts_per_clause_width() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 3..=6 {
        let clause = random_clause(&mut rng, k + 1, k);
        let extra = k - 3;
        let anc: Vec<usize> = (k + 1..k + 1 + extra).collect();
        let bits: Vec<usize> = (0..extra).collect();
        let ops = clause_phase_separator(&clause, 0.4, &anc, &bits).unwrap();
        let circ = bare_circuit(k + 1 + extra, extra, ops);
        let want = if k == 3 { 5 } else { 4 * k - 8 };
        assert_eq!(census(&circ).two_qubit_count, want, "k={k}");
    }
}
