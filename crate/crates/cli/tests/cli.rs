use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qsat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsat"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("qsat runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = qsat(dir, args);
    assert!(
        out.status.success(),
        "qsat {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn census_line(stdout: &str, label: &str) -> usize {
    stdout
        .lines()
        .find(|l| l.starts_with(label))
        .and_then(|l| l.split_whitespace().last())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no {label:?} in {stdout}"))
}

fn summary_value<'a>(stdout: &'a str, label: &str) -> &'a str {
    stdout
        .lines()
        .find(|l| l.starts_with(label))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap_or_else(|| panic!("no {label:?} in {stdout}"))
}

#[test]
fn generate_is_deterministic_and_writes_manifests() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["generate", "-n", "8", "--seed", "5", "-o", "a"]);
    ok(dir.path(), &["generate", "-n", "8", "--seed", "5", "-o", "b"]);
    let a = fs::read_to_string(dir.path().join("a.cnf")).unwrap();
    assert_eq!(a, fs::read_to_string(dir.path().join("b.cnf")).unwrap());
    assert_eq!(
        fs::read_to_string(dir.path().join("a.json")).unwrap(),
        fs::read_to_string(dir.path().join("b.json")).unwrap()
    );
    assert!(a.contains("p cnf 8 32"));
    for f in ["a.cnf.manifest.json", "a.json.manifest.json"] {
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(f)).unwrap()).unwrap();
        assert_eq!(m["subcommand"], "generate");
        assert_eq!(m["seeds"][0], 5);
        assert_eq!(m["flags"]["n"], 8);
        assert!(m["started_at"].is_string() && m["version"].is_string());
    }
}

#[test]
fn usage_and_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsat(dir.path(), &["generate", "-n", "2", "-k", "3", "-o", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n < k"));

    let out = qsat(dir.path(), &["optimize", "-i", "missing.cnf", "-o", "angles"]);
    assert_eq!(out.status.code(), Some(2));

    let out = qsat(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(dir.path().join("bad.cnf"), "p cnf 3 1\n1 2 9 0\n").unwrap();
    let out = qsat(dir.path(), &["optimize", "-i", "bad.cnf", "-o", "angles"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_n8_p10_has_1600_two_qubit_gates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let generated = ok(d, &["generate", "-n", "8", "--seed", "1", "-o", "inst"]);
    let id = summary_value(&generated, "instance");
    let angles = serde_json::json!({
        "instance_id": id,
        "p": 10,
        "gammas": vec![0.3; 10],
        "betas": vec![0.2; 10],
        "expectation": 0.0,
        "ideal_ratio": 0.0,
        "seed": 0,
        "hops": 0,
        "iterations": 0,
        "trace": []
    });
    fs::write(d.join("angles.json"), angles.to_string()).unwrap();

    for (gateset, two) in [("none", 1600), ("rzz", 1600), ("cx", 1920)] {
        let out = ok(
            d,
            &["build", "-i", "inst.cnf", "-a", "angles.json", "--gateset", gateset, "--format", "qasm3", "-o", "c.qasm"],
        );
        assert_eq!(census_line(&out, "two-qubit gates"), two, "{gateset}");
    }
    assert!(d.join("c.qasm.manifest.json").exists());
}

#[test]
fn four_sat_exports_conditionals_only_to_qasm3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "-n", "6", "-k", "4", "--seed", "3", "-o", "k4"]);
    ok(d, &["optimize", "-i", "k4.cnf", "-p", "1", "--hops", "0", "-o", "angles"]);
    assert!(d.join("angles/angles_p1.json").exists());
    assert!(d.join("angles.manifest.json").exists());

    ok(d, &["build", "-i", "k4.cnf", "-a", "angles/angles_p1.json", "--format", "qasm3", "-o", "k4.qasm"]);
    let text = fs::read_to_string(d.join("k4.qasm")).unwrap();
    assert!(text.starts_with("OPENQASM 3"));
    assert!(text.contains("if ("));
    assert!(text.contains("reset"));

    let out = qsat(d, &["build", "-i", "k4.cnf", "-a", "angles/angles_p1.json", "--format", "qasm2", "-o", "k4.qasm2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("feed-forward requires QASM3"));
}

#[test]
fn optimize_single_round_without_hops() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "-n", "5", "--seed", "9", "-o", "inst"]);
    ok(d, &["optimize", "-i", "inst.json", "-p", "1", "--hops", "0", "--seed", "4", "-o", "angles"]);
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("angles/angles_p1.json")).unwrap()).unwrap();
    assert_eq!(r["p"], 1);
    assert_eq!(r["hops"], 0);
    assert_eq!(r["trace"].as_array().unwrap().len(), 1);
    let ratio = r["ideal_ratio"].as_f64().unwrap();
    assert!(ratio > 0.875 && ratio <= 1.0, "{ratio}");
}

#[test]
fn uniform_shots_file_collapses_p_noise_to_p_max() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "-n", "6", "--seed", "2", "-o", "inst"]);
    // every round is the uniform distribution over all 64 strings, repeated
    let mut lines = String::new();
    for p in 1..=4 {
        for rep in 0..4 {
            for x in 0..64u32 {
                lines.push_str(&format!(
                    "{{\"p\":{p},\"bitstring\":\"{x:06b}\",\"ancilla_outcomes\":\"\",\"seed\":{}}}\n",
                    rep * 64 + x
                ));
            }
        }
    }
    fs::write(d.join("shots.jsonl"), lines).unwrap();
    let out = ok(
        d,
        &["bench", "-i", "inst.cnf", "--shots-file", "shots.jsonl", "--baseline-samples", "20000", "-o", "curve.csv", "--svg", "curve.svg"],
    );
    let p_max = summary_value(&out, "p_max");
    assert_eq!(p_max, summary_value(&out, "p_noise"), "{out}");
    let csv = fs::read_to_string(d.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().contains(",external,"));
    assert!(fs::read_to_string(d.join("curve.svg")).unwrap().contains("<svg"));
    assert!(d.join("curve.csv.manifest.json").exists());
}

#[test]
fn shots_for_another_instance_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "-n", "6", "--seed", "2", "-o", "inst"]);
    fs::write(d.join("short.jsonl"), "{\"p\":1,\"bitstring\":\"0101\",\"ancilla_outcomes\":\"\",\"seed\":0}\n").unwrap();
    let out = qsat(d, &["bench", "-i", "inst.cnf", "--shots-file", "short.jsonl", "-o", "c.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_then_bench_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "-n", "5", "--seed", "11", "-o", "inst"]);
    ok(d, &["optimize", "-i", "inst.cnf", "-p", "1..2", "--hops", "1", "-o", "angles"]);
    ok(
        d,
        &["simulate", "-i", "inst.cnf", "-a", "angles/angles_p1.json", "angles/angles_p2.json", "--shots", "30", "--seed", "3", "-o", "shots.jsonl"],
    );
    let shots = fs::read_to_string(d.join("shots.jsonl")).unwrap();
    assert_eq!(shots.lines().count(), 60);
    let out = ok(d, &["bench", "-i", "inst.cnf", "--shots-file", "shots.jsonl", "--baseline-samples", "5000", "-o", "c.csv"]);
    assert!(out.contains("qaoa_volume"));
    let ideal = ok(d, &["bench", "-i", "inst.cnf", "-a", "angles/angles_p1.json", "angles/angles_p2.json", "--baseline-samples", "5000", "-o", "i.csv"]);
    assert_eq!(summary_value(&ideal, "p_noise"), "none");
}
