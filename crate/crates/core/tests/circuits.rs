mod common;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{aligned_distance, bare_circuit};
use qsat_core::circuit::qasm::{emit_qasm2, emit_qasm3, parse_qasm};
use qsat_core::circuit::{
    build_qaoa_circuit, build_qaoa_circuit_ordered, census, clause_layers, lower_rzz, transpile,
    ClauseOrder, Gateset,
};
use qsat_core::sat::generate_random_ksat;
use qsat_core::sim::{dense_unitary, exact_expectation_gate_level};
use qsat_core::{AngleSchedule, Circuit, GateKind, GateOp};

fn random_unitary_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    let mut ops = Vec::with_capacity(len);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let mut r = rng.random_range(0..n - 1);
        if r >= q {
            r += 1;
        }
        let theta = rng.random_range(-TAU..TAU);
        ops.push(match rng.random_range(0..13) {
            0 => GateOp::h(q),
            1 => GateOp::x(q),
            2 => GateOp::z(q),
            3 => GateOp::one(GateKind::S, q),
            4 => GateOp::one(GateKind::Sdg, q),
            5 => GateOp::one(GateKind::T, q),
            6 => GateOp::one(GateKind::Tdg, q),
            7 => GateOp::rx(theta, q),
            8 => GateOp::ry(theta, q),
            9 => GateOp::rz(theta, q),
            10 => GateOp::rzz(theta, q, r),
            11 => GateOp::cx(q, r),
            _ => GateOp::cz(q, r),
        });
    }
    bare_circuit(n, 0, ops)
}

fn unitary_distance(a: &Circuit, b: &Circuit) -> f64 {
    let ua: Vec<_> = dense_unitary(a).unwrap().concat();
    let ub: Vec<_> = dense_unitary(b).unwrap().concat();
    aligned_distance(&ua, &ub)
}

#[test]
fn transpiled_circuits_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..40 {
        let n = rng.random_range(2..=4);
        let c = random_unitary_circuit(&mut rng, n, 30);
        for set in [Gateset::RzzSet, Gateset::CxSet] {
            let t = transpile(&c, set);
            assert!(t.ops.iter().all(|op| set.contains(&op.kind)), "{set}");
            let d = unitary_distance(&c, &t);
            assert!(d < 1e-10, "{set}: {d:e}");
        }
    }
}

#[test]
fn single_gate_rewrites() {
    let cx = bare_circuit(2, 0, vec![GateOp::cx(0, 1)]);
    let t = transpile(&cx, Gateset::RzzSet);
    let g = census(&t);
    assert_eq!(g.two_qubit_count, 1);
    assert!(t.ops.iter().any(|op| matches!(op.kind, GateKind::Rzz(a) if (a.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-12)));
    assert!(unitary_distance(&cx, &t) < 1e-12);

    let rzz = bare_circuit(2, 0, vec![GateOp::rzz(0.37, 0, 1)]);
    let t = transpile(&rzz, Gateset::CxSet);
    let kinds: Vec<&str> = t.ops.iter().map(|op| op.kind.name()).collect();
    assert_eq!(kinds, ["cx", "rz", "cx"]);
    assert!(unitary_distance(&rzz, &t) < 1e-12);
}

#[test]
fn unsupported_gateset_name() {
    assert!("rzz".parse::<Gateset>().is_ok());
    assert!("cx".parse::<Gateset>().is_ok());
    assert!("ms".parse::<Gateset>().is_err());
}

#[test]
fn two_qubit_total_is_twenty_n_p() {
    for n in [6, 8, 10, 20] {
        let inst = generate_random_ksat(n, 3, 4.0, n as u64).unwrap();
        for p in [1, 2, 10] {
            let angles = AngleSchedule::constant(p, 0.3, 0.2).unwrap();
            let c = build_qaoa_circuit(&inst, &angles).unwrap();
            assert_eq!(census(&c).two_qubit_count, 20 * n * p, "n={n} p={p}");
        }
    }
    let inst = generate_random_ksat(8, 3, 4.0, 1).unwrap();
    for p in 1..=10 {
        let c = build_qaoa_circuit(&inst, &AngleSchedule::constant(p, 0.3, 0.2).unwrap()).unwrap();
        assert_eq!(census(&c).two_qubit_count, 160 * p);
    }
}

#[test]
fn transpile_keeps_two_qubit_count() {
    let inst = generate_random_ksat(6, 3, 4.0, 17).unwrap();
    let c = build_qaoa_circuit(&inst, &AngleSchedule::new(vec![0.8], vec![0.4]).unwrap()).unwrap();
    assert_eq!(census(&c).two_qubit_count, 120);
    // each Rzz costs two CX in the CX set
    for (set, want) in [(Gateset::RzzSet, 120), (Gateset::CxSet, 144)] {
        let t = transpile(&c, set);
        assert_eq!(census(&t).two_qubit_count, want, "{set}");
        let before = exact_expectation_gate_level(&c, &inst).unwrap();
        let after = exact_expectation_gate_level(&t, &inst).unwrap();
        assert!((before - after).abs() < 1e-10);
    }
}

#[test]
fn transpiled_feed_forward_circuit_keeps_expectation() {
    let inst = generate_random_ksat(5, 4, 2.0, 4).unwrap();
    let c = build_qaoa_circuit(&inst, &AngleSchedule::new(vec![0.8, 0.1], vec![0.4, 1.0]).unwrap()).unwrap();
    let before = exact_expectation_gate_level(&c, &inst).unwrap();
    for set in [Gateset::RzzSet, Gateset::CxSet] {
        let t = transpile(&c, set);
        assert_eq!(census(&t).measure_count, census(&c).measure_count);
        let after = exact_expectation_gate_level(&t, &inst).unwrap();
        assert!((before - after).abs() < 1e-10, "{set}");
    }
}

fn mean_depth(n: usize, order: ClauseOrder) -> f64 {
    let angles = AngleSchedule::new(vec![0.8], vec![0.4]).unwrap();
    let seeds = 0..5u64;
    let total: usize = seeds
        .clone()
        .map(|seed| {
            let inst = generate_random_ksat(n, 3, 4.0, 500 + seed).unwrap();
            census(&build_qaoa_circuit_ordered(&inst, &angles, order).unwrap()).depth
        })
        .sum();
    total as f64 / seeds.count() as f64
}

#[test]
fn layered_depth_stays_in_a_band_across_sizes() {
    let means: Vec<f64> = (6..=20).map(|n| mean_depth(n, ClauseOrder::Layered)).collect();
    let max = means.iter().copied().fold(f64::MIN, f64::max);
    let min = means.iter().copied().fold(f64::MAX, f64::min);
    assert!(max / min < 1.25, "mean depths {means:?}");
}

#[test]
fn instance_order_depth_grows_with_n() {
    // without reordering the clause chain lengthens with n
    assert!(mean_depth(20, ClauseOrder::Instance) > 1.25 * mean_depth(6, ClauseOrder::Instance));
}

#[test]
fn layered_order_preserves_state_and_counts() {
    for k in [3, 4] {
        let inst = generate_random_ksat(6, k, 3.0, 21).unwrap();
        let angles = AngleSchedule::new(vec![0.8, 0.3], vec![0.4, 0.2]).unwrap();
        let a = build_qaoa_circuit(&inst, &angles).unwrap();
        let b = build_qaoa_circuit_ordered(&inst, &angles, ClauseOrder::Layered).unwrap();
        assert_eq!(census(&a).two_qubit_count, census(&b).two_qubit_count);
        let ea = exact_expectation_gate_level(&a, &inst).unwrap();
        let eb = exact_expectation_gate_level(&b, &inst).unwrap();
        assert!((ea - eb).abs() < 1e-10);
    }
    let inst = generate_random_ksat(10, 3, 4.0, 3).unwrap();
    let layers = clause_layers(&inst);
    let mut all: Vec<usize> = layers.concat();
    all.sort();
    assert_eq!(all, (0..inst.m()).collect::<Vec<_>>());
    for layer in &layers {
        let masks: Vec<u64> = layer.iter().map(|&j| inst.clauses()[j].mask()).collect();
        assert_eq!(masks.iter().fold(0, |a, m| a ^ m), masks.iter().fold(0, |a, m| a | m));
    }
}

#[test]
fn qasm2_round_trip_matches_lowered_census() {
    let inst = generate_random_ksat(6, 3, 4.0, 17).unwrap();
    let c = build_qaoa_circuit(&inst, &AngleSchedule::new(vec![0.8, 0.2], vec![0.4, 0.9]).unwrap()).unwrap();
    let text = emit_qasm2(&c).unwrap();
    assert!(text.starts_with("OPENQASM 2.0;"));
    let back = parse_qasm(&text).unwrap();
    assert_eq!(census(&back), census(&lower_rzz(&c)));
    assert_eq!(back.metadata.data_qubits, 6);
    let a = exact_expectation_gate_level(&c, &inst).unwrap();
    let b = exact_expectation_gate_level(&back, &inst).unwrap();
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn qasm3_keeps_feed_forward() {
    let inst = generate_random_ksat(5, 4, 2.0, 9).unwrap();
    let c = build_qaoa_circuit(&inst, &AngleSchedule::new(vec![0.8], vec![0.4]).unwrap()).unwrap();
    assert!(emit_qasm2(&c).is_err());
    let text = emit_qasm3(&c);
    assert!(text.starts_with("OPENQASM 3"));
    assert!(text.contains("if ("));
    assert!(text.contains("reset "));
    let back = parse_qasm(&text).unwrap();
    assert_eq!(census(&back), census(&c));
    assert_eq!(back.num_clbits, c.num_clbits);
    let a = exact_expectation_gate_level(&c, &inst).unwrap();
    let b = exact_expectation_gate_level(&back, &inst).unwrap();
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn circuit_json_round_trip() {
    let inst = generate_random_ksat(5, 4, 2.0, 9).unwrap();
    let c = build_qaoa_circuit(&inst, &AngleSchedule::new(vec![0.8], vec![0.4]).unwrap()).unwrap();
    assert_eq!(Circuit::from_json(&c.to_json().unwrap()).unwrap(), c);
}
