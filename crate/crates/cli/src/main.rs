//! `qsat`: file-based pipeline for QAOA MAX k-SAT experiments.
//!
//! generate → optimize → build → simulate → bench, each step writing its
//! artifacts next to a `<artifact>.manifest.json` describing the run.

mod manifest;

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::RunManifest;
use qsat_core::bench::{
    curve_from_shots, ideal_curve, random_baseline, render_svg, summarize, write_curve_csv,
    BenchmarkCurve, CurveSource, Scorer, DEFAULT_BASELINE_SAMPLES,
};
use qsat_core::circuit::qasm::{emit_qasm2, emit_qasm3};
use qsat_core::circuit::{build_qaoa_circuit_ordered, census, transpile, ClauseOrder, Gateset};
use qsat_core::fastsim::QaoaEvaluator;
use qsat_core::optimizer::{optimize_sweep, BasinHoppingConfig, OptimizationResult};
use qsat_core::sat::{emit_dimacs, generate_random_ksat, parse_dimacs, InstanceJson};
use qsat_core::sim::{read_shots_jsonl, write_shots_jsonl, Simulator};
use qsat_core::{Assignment, Error as CoreError, KSatInstance};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qsat", version, about = "QAOA circuits and benchmarks for MAX k-SAT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random k-SAT instance as DIMACS and JSON.
    Generate(GenerateArgs),
    /// Basin-hopping angle search over a range of round counts.
    Optimize(OptimizeArgs),
    /// Synthesize a circuit, print its census and export it.
    #[command(alias = "export")]
    Build(BuildArgs),
    /// Sample shots from the gate-level simulator.
    Simulate(SimulateArgs),
    /// Approximation-ratio curve, random baseline and (p_max, p_noise).
    Bench(BenchArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(short = 'n', long)]
    n: usize,
    #[arg(short = 'k', long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 4.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path stem; `.cnf` and `.json` are appended.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    /// Instance file (`.cnf` or `.json`).
    #[arg(short, long)]
    instance: PathBuf,
    /// Round count `P` or inclusive range `A..B`.
    #[arg(short = 'p', long, default_value = "1")]
    p: String,
    #[arg(long, default_value_t = 10)]
    hops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop the sweep once the ideal ratio exceeds this.
    #[arg(long, default_value_t = 0.999)]
    stop_ratio: f64,
    /// Directory receiving `angles_p{p}.json`; the run manifest goes to
    /// `<dir>.manifest.json`.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Qasm2,
    Qasm3,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TargetGates {
    /// Keep the synthesized gates.
    None,
    Rzz,
    Cx,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OrderArg {
    Instance,
    Layered,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    #[arg(short, long)]
    instance: PathBuf,
    #[arg(short, long)]
    angles: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    gateset: TargetGates,
    #[arg(long, value_enum, default_value = "qasm3")]
    format: Format,
    #[arg(long, value_enum, default_value = "instance")]
    clause_order: OrderArg,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(short, long)]
    instance: PathBuf,
    /// One angle file per round count.
    #[arg(short, long, num_args = 1.., required = true)]
    angles: Vec<PathBuf>,
    #[arg(long, default_value_t = 40)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    #[arg(short, long)]
    instance: PathBuf,
    /// Angle files; without `--shots` the exact output distributions are used.
    #[arg(short, long, num_args = 1.., conflicts_with = "shots_file")]
    angles: Vec<PathBuf>,
    /// Shots per angle file, sampled from the gate-level simulator.
    #[arg(long)]
    shots: Option<usize>,
    /// Shots JSON lines with round tags, e.g. from hardware.
    #[arg(long)]
    shots_file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BASELINE_SAMPLES)]
    baseline_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Curve CSV.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<CoreError>(), Some(CoreError::NumericalFailure(_))));
            ExitCode::from(if numerical { EXIT_NUMERICAL } else { EXIT_USAGE })
        }
    }
}

/// `QSAT_THREADS` caps the worker pool.
fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("QSAT_THREADS") {
        let threads: usize = v
            .parse()
            .with_context(|| format!("QSAT_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Build(a) => cmd_build(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn load_instance(path: &Path) -> anyhow::Result<KSatInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = if path.extension().is_some_and(|e| e == "json") {
        let j: InstanceJson = serde_json::from_str(&text)?;
        KSatInstance::from_json(&j)?
    } else {
        parse_dimacs(&text)?
    };
    Ok(inst)
}

fn load_angles(path: &Path, instance: &KSatInstance) -> anyhow::Result<OptimizationResult> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let r = OptimizationResult::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    if r.instance_id != instance.id() {
        bail!(
            "{} belongs to instance {}, not {}",
            path.display(),
            r.instance_id,
            instance.id()
        );
    }
    Ok(r)
}

fn parse_rounds(s: &str) -> anyhow::Result<(usize, usize)> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse()?, b.trim_start_matches('=').trim().parse()?),
        None => {
            let p = s.trim().parse()?;
            (p, p)
        }
    };
    if lo == 0 || lo > hi {
        bail!("bad round range {s:?}");
    }
    Ok((lo, hi))
}

fn write_file(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let manifest = RunManifest::start("generate", a, vec![a.seed]);
    let inst = generate_random_ksat(a.n, a.k, a.density, a.seed)?;
    let cnf = with_suffix(&a.out, ".cnf");
    let json = with_suffix(&a.out, ".json");
    write_file(&cnf, emit_dimacs(&inst).as_bytes())?;
    write_file(&json, serde_json::to_string_pretty(&inst.to_json())?.as_bytes())?;
    manifest.finish(&[], &[&cnf, &json])?;
    println!("instance {} n={} k={} m={}", inst.id(), inst.n(), inst.k(), inst.m());
    println!("wrote {} and {}", cnf.display(), json.display());
    Ok(())
}

fn cmd_optimize(a: &OptimizeArgs) -> anyhow::Result<()> {
    let (lo, hi) = parse_rounds(&a.p)?;
    let inst = load_instance(&a.instance)?;
    let seeds = (lo..=hi).map(|p| a.seed.wrapping_add(p as u64)).collect();
    let manifest = RunManifest::start("optimize", a, seeds);
    let eval = QaoaEvaluator::new(&inst)?;
    let config = BasinHoppingConfig::with_hops(a.hops);
    let results = optimize_sweep(&eval, &inst.id(), lo, hi, &config, a.seed, Some(a.stop_ratio))?;
    let mut outputs = Vec::new();
    for r in &results {
        let path = a.out.join(format!("angles_p{}.json", r.p));
        write_file(&path, serde_json::to_string_pretty(r)?.as_bytes())?;
        println!(
            "p={:>2}  expectation={:.6}  ideal_ratio={:.6}  iterations={}",
            r.p, r.expectation, r.ideal_ratio, r.iterations
        );
        outputs.push(path);
    }
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    // one manifest for the whole directory keeps `angles_p*.json` globs clean
    manifest.finish_beside(&[&a.instance], &refs, &[&a.out])?;
    Ok(())
}

fn cmd_build(a: &BuildArgs) -> anyhow::Result<()> {
    let manifest = RunManifest::start("build", a, Vec::new());
    let inst = load_instance(&a.instance)?;
    let angles = load_angles(&a.angles, &inst)?;
    let order = match a.clause_order {
        OrderArg::Instance => ClauseOrder::Instance,
        OrderArg::Layered => ClauseOrder::Layered,
    };
    let mut circuit = build_qaoa_circuit_ordered(&inst, &angles.angles, order)?;
    circuit = match a.gateset {
        TargetGates::None => circuit,
        TargetGates::Rzz => transpile(&circuit, Gateset::RzzSet),
        TargetGates::Cx => transpile(&circuit, Gateset::CxSet),
    };
    let text = match a.format {
        Format::Qasm2 => emit_qasm2(&circuit)?,
        Format::Qasm3 => emit_qasm3(&circuit),
        Format::Json => circuit.to_json()?,
    };
    write_file(&a.out, text.as_bytes())?;
    manifest.finish(&[&a.instance, &a.angles], &[&a.out])?;
    let g = census(&circuit);
    println!("qubits           {}", circuit.num_qubits);
    println!("one-qubit gates  {}", g.one_qubit_count);
    println!("two-qubit gates  {}", g.two_qubit_count);
    println!("measurements     {}", g.measure_count);
    println!("resets           {}", g.reset_count);
    println!("depth            {}", g.depth);
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> anyhow::Result<()> {
    let manifest = RunManifest::start("simulate", a, vec![a.seed]);
    let inst = load_instance(&a.instance)?;
    let mut out = BufWriter::new(Vec::new());
    for (i, path) in a.angles.iter().enumerate() {
        let angles = load_angles(path, &inst)?;
        let circuit = build_qaoa_circuit_ordered(&inst, &angles.angles, ClauseOrder::Instance)?;
        let shots = Simulator::new().sample(&circuit, a.shots, a.seed.wrapping_add(i as u64))?;
        write_shots_jsonl(&mut out, &shots, Some(angles.p))?;
        println!("p={:>2}  {} shots", angles.p, shots.len());
    }
    out.flush()?;
    let bytes = out.into_inner().map_err(|e| anyhow!("{e}"))?;
    write_file(&a.out, &bytes)?;
    let mut inputs: Vec<&Path> = vec![&a.instance];
    inputs.extend(a.angles.iter().map(PathBuf::as_path));
    manifest.finish(&inputs, &[&a.out])?;
    Ok(())
}

fn group_by_round(
    shots: Vec<(Option<usize>, Assignment)>,
    n: usize,
) -> anyhow::Result<Vec<(usize, Vec<Assignment>)>> {
    let mut per_p: Vec<(usize, Vec<Assignment>)> = Vec::new();
    for (i, (p, x)) in shots.into_iter().enumerate() {
        if x.len() != n {
            bail!("shot {} has {} bits but the instance has {n} variables", i + 1, x.len());
        }
        let p = p.unwrap_or(1);
        match per_p.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => v.push(x),
            None => per_p.push((p, vec![x])),
        }
    }
    Ok(per_p)
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<()> {
    let manifest = RunManifest::start("bench", a, vec![a.seed]);
    let inst = load_instance(&a.instance)?;
    let scorer = Scorer::new(&inst)?;
    let mut inputs: Vec<&Path> = vec![&a.instance];

    let curve: BenchmarkCurve = if let Some(file) = &a.shots_file {
        inputs.push(file);
        let reader = BufReader::new(
            fs::File::open(file).with_context(|| format!("reading {}", file.display()))?,
        );
        let shots = read_shots_jsonl(reader)?
            .into_iter()
            .map(|(p, s)| (p, s.bitstring))
            .collect();
        curve_from_shots(&scorer, &group_by_round(shots, inst.n())?, CurveSource::External)?
    } else {
        if a.angles.is_empty() {
            bail!("bench needs --angles or --shots-file");
        }
        inputs.extend(a.angles.iter().map(PathBuf::as_path));
        let results = a
            .angles
            .iter()
            .map(|p| load_angles(p, &inst))
            .collect::<anyhow::Result<Vec<_>>>()?;
        match a.shots {
            None => {
                let eval = QaoaEvaluator::new(&inst)?;
                let schedules: Vec<_> = results.iter().map(|r| &r.angles).collect();
                ideal_curve(&eval, &scorer, &schedules)?
            }
            Some(shots) => {
                let mut tagged = Vec::new();
                for (i, r) in results.iter().enumerate() {
                    let circuit = build_qaoa_circuit_ordered(&inst, &r.angles, ClauseOrder::Instance)?;
                    let sampled = Simulator::new().sample(&circuit, shots, a.seed.wrapping_add(i as u64))?;
                    tagged.extend(sampled.into_iter().map(|s| (Some(r.p), s.bitstring)));
                }
                curve_from_shots(&scorer, &group_by_round(tagged, inst.n())?, CurveSource::Shots)?
            }
        }
    };

    let baseline = random_baseline(&scorer, a.baseline_samples, a.seed)?;
    let mut csv = Vec::new();
    write_curve_csv(&mut csv, &curve, &baseline)?;
    write_file(&a.out, &csv)?;
    let mut outputs: Vec<&Path> = vec![&a.out];
    if let Some(svg) = &a.svg {
        write_file(svg, render_svg(&[&curve], &baseline).as_bytes())?;
        outputs.push(svg);
    }
    manifest.finish(&inputs, &outputs)?;

    let s = summarize(&curve, &baseline);
    let show = |v: Option<usize>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
    println!("instance      {} (C_opt = {})", inst.id(), scorer.c_opt());
    println!(
        "baseline      mean {:.4}  pct40 {:.4}  pct60 {:.4}  ({} samples)",
        baseline.mean_ratio, baseline.pct40, baseline.pct60, baseline.sample_count
    );
    for pt in curve.points() {
        println!(
            "p={:>2}  mean {:.4}  pct40 {:.4}  pct60 {:.4}  shots {}",
            pt.p, pt.mean_ratio, pt.pct40, pt.pct60, pt.n_shots
        );
    }
    println!("p_max         {}", show(s.p_max));
    println!("p_noise       {}", show(s.p_noise));
    println!("qaoa_volume   {}", show(s.qaoa_volume));
    Ok(())
}
