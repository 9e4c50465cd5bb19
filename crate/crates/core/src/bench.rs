//! Benchmark quantities: approximation ratios, uniform-sampling baselines,
//! per-round curves and the `(p_max, p_noise)` pair.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::AngleSchedule;
use crate::error::{Error, Result};
use crate::fastsim::QaoaEvaluator;
use crate::optimizer::OptimizationResult;
use crate::sat::{brute_force_optimum, Assignment, KSatInstance};

pub const DEFAULT_BASELINE_SAMPLES: usize = 100_000;

/// Scores assignments of one instance against its optimum.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    instance: &'a KSatInstance,
    c_opt: usize,
}

impl<'a> Scorer<'a> {
    /// Computes `C_opt` by exhaustive search.
    pub fn new(instance: &'a KSatInstance) -> Result<Self> {
        let c_opt = brute_force_optimum(instance)?.c_opt;
        Self::with_c_opt(instance, c_opt)
    }

    pub fn with_c_opt(instance: &'a KSatInstance, c_opt: usize) -> Result<Self> {
        if c_opt == 0 || c_opt > instance.m() {
            return Err(Error::InvalidParameters(format!(
                "C_opt = {c_opt} outside 1..={}",
                instance.m()
            )));
        }
        Ok(Self { instance, c_opt })
    }

    pub fn instance(&self) -> &KSatInstance {
        self.instance
    }

    pub fn c_opt(&self) -> usize {
        self.c_opt
    }

    /// `C(x) / C_opt`.
    pub fn ratio(&self, x: &Assignment) -> Result<f64> {
        Ok(self.instance.evaluate(x)? as f64 / self.c_opt as f64)
    }

    pub fn ratio_index(&self, x: u64) -> f64 {
        self.instance.evaluate_index(x) as f64 / self.c_opt as f64
    }
}

pub fn approximation_ratio(instance: &KSatInstance, c_opt: usize, x: &Assignment) -> Result<f64> {
    Scorer::with_c_opt(instance, c_opt)?.ratio(x)
}

/// Nearest-rank percentile of an ascending slice: the value at rank
/// `ceil(pct/100 · N)`, with rank at least 1.
pub fn percentile(sorted: &[f64], pct: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=100.0).contains(&pct) {
        return None;
    }
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ratio statistics of uniformly random assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub mean_ratio: f64,
    pub pct40: f64,
    pub pct60: f64,
    pub sample_count: usize,
    pub seed: u64,
    /// Standard error of `mean_ratio`.
    pub std_error: f64,
}

pub fn random_baseline(scorer: &Scorer<'_>, samples: usize, seed: u64) -> Result<Baseline> {
    if samples == 0 {
        return Err(Error::InvalidParameters("baseline needs at least one sample".into()));
    }
    let n = scorer.instance().n();
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratios: Vec<f64> = (0..samples)
        .map(|_| scorer.ratio_index(rng.random::<u64>() & mask))
        .collect();
    let sorted = sorted_copy(&ratios);
    let (mean_ratio, std_error) = mean_and_std_error(&ratios);
    Ok(Baseline {
        mean_ratio,
        pct40: percentile(&sorted, 40.0).unwrap_or(0.0),
        pct60: percentile(&sorted, 60.0).unwrap_or(0.0),
        sample_count: samples,
        seed,
        std_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSource {
    /// Exact output distribution of the noise-free circuit.
    Ideal,
    /// Shots from this crate's simulator.
    Shots,
    /// Shots ingested from elsewhere, e.g. hardware.
    External,
}

impl fmt::Display for CurveSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveSource::Ideal => "ideal",
            CurveSource::Shots => "shots",
            CurveSource::External => "external",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: usize,
    pub mean_ratio: f64,
    pub pct40: f64,
    pub pct60: f64,
    /// Zero for ideal points.
    pub n_shots: usize,
    pub source: CurveSource,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sample_ratios: Vec<f64>,
}

impl CurvePoint {
    pub fn from_ratios(p: usize, ratios: Vec<f64>, source: CurveSource) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InvalidParameters(format!("no shots for p = {p}")));
        }
        let sorted = sorted_copy(&ratios);
        let (mean_ratio, _) = mean_and_std_error(&ratios);
        Ok(Self {
            p,
            mean_ratio,
            pct40: percentile(&sorted, 40.0).unwrap_or(0.0),
            pct60: percentile(&sorted, 60.0).unwrap_or(0.0),
            n_shots: ratios.len(),
            source,
            sample_ratios: ratios,
        })
    }

    /// Exact statistics of the ratio under a probability vector over packed
    /// assignments. Percentiles use the weighted nearest-rank rule.
    pub fn from_distribution(p: usize, scorer: &Scorer<'_>, probs: &[f64]) -> Result<Self> {
        let n = scorer.instance().n();
        if probs.len() != 1usize << n {
            return Err(Error::InvalidAssignment {
                expected: 1 << n,
                got: probs.len(),
            });
        }
        let mut by_value = vec![0.0; scorer.instance().m() + 1];
        for (x, &pr) in probs.iter().enumerate() {
            by_value[scorer.instance().evaluate_index(x as u64)] += pr;
        }
        let total: f64 = by_value.iter().sum();
        let c_opt = scorer.c_opt() as f64;
        let mean_ratio = by_value
            .iter()
            .enumerate()
            .map(|(c, pr)| c as f64 * pr)
            .sum::<f64>()
            / (total * c_opt);
        let weighted = |pct: f64| {
            let target = pct / 100.0 * total - 1e-12;
            let mut acc = 0.0;
            for (c, pr) in by_value.iter().enumerate() {
                acc += pr;
                if *pr > 0.0 && acc >= target {
                    return c as f64 / c_opt;
                }
            }
            (by_value.len() - 1) as f64 / c_opt
        };
        Ok(Self {
            p,
            mean_ratio,
            pct40: weighted(40.0),
            pct60: weighted(60.0),
            n_shots: 0,
            source: CurveSource::Ideal,
            sample_ratios: Vec::new(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCurve {
    pub instance_id: String,
    pub n: usize,
    points: Vec<CurvePoint>,
}

impl BenchmarkCurve {
    pub fn new(instance_id: impl Into<String>, n: usize) -> Self {
        Self {
            instance_id: instance_id.into(),
            n,
            points: Vec::new(),
        }
    }

    /// Appends a point; `p` must exceed every earlier `p` and the ratios
    /// must lie in `[0, 1]`.
    pub fn push(&mut self, point: CurvePoint) -> Result<()> {
        if let Some(last) = self.points.last() {
            if point.p <= last.p {
                return Err(Error::InvalidParameters(format!(
                    "curve rounds must increase: {} after {}",
                    point.p, last.p
                )));
            }
        }
        let in_range = |r: f64| (-1e-12..=1.0 + 1e-12).contains(&r);
        if !in_range(point.mean_ratio)
            || !in_range(point.pct40)
            || !in_range(point.pct60)
            || !point.sample_ratios.iter().all(|&r| in_range(r))
        {
            return Err(Error::InvalidParameters(format!(
                "ratio outside [0, 1] at p = {}",
                point.p
            )));
        }
        self.points.push(point);
        Ok(())
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Curve from bare per-round mean ratios; percentiles set to the mean.
    pub fn from_means(
        instance_id: impl Into<String>,
        n: usize,
        means: &[(usize, f64)],
        source: CurveSource,
    ) -> Result<Self> {
        let mut c = Self::new(instance_id, n);
        for &(p, mean_ratio) in means {
            c.push(CurvePoint {
                p,
                mean_ratio,
                pct40: mean_ratio,
                pct60: mean_ratio,
                n_shots: 0,
                source,
                sample_ratios: Vec::new(),
            })?;
        }
        Ok(c)
    }
}

/// Groups shots by round and scores them. Rounds are sorted ascending.
pub fn curve_from_shots(
    scorer: &Scorer<'_>,
    per_p: &[(usize, Vec<Assignment>)],
    source: CurveSource,
) -> Result<BenchmarkCurve> {
    let mut sorted: Vec<&(usize, Vec<Assignment>)> = per_p.iter().collect();
    sorted.sort_by_key(|(p, _)| *p);
    let mut curve = BenchmarkCurve::new(scorer.instance().id(), scorer.instance().n());
    for (p, shots) in sorted {
        let ratios = shots
            .iter()
            .map(|x| scorer.ratio(x))
            .collect::<Result<Vec<_>>>()?;
        curve.push(CurvePoint::from_ratios(*p, ratios, source)?)?;
    }
    Ok(curve)
}

/// Noise-free curve from a sequence of optimized schedules.
pub fn ideal_curve(
    eval: &QaoaEvaluator,
    scorer: &Scorer<'_>,
    schedules: &[&AngleSchedule],
) -> Result<BenchmarkCurve> {
    let mut curve = BenchmarkCurve::new(scorer.instance().id(), scorer.instance().n());
    for angles in schedules {
        let probs = eval.distribution(angles);
        curve.push(CurvePoint::from_distribution(angles.p(), scorer, &probs)?)?;
    }
    Ok(curve)
}

pub fn ideal_curve_from_results(
    eval: &QaoaEvaluator,
    scorer: &Scorer<'_>,
    results: &[OptimizationResult],
) -> Result<BenchmarkCurve> {
    let schedules: Vec<&AngleSchedule> = results.iter().map(|r| &r.angles).collect();
    ideal_curve(eval, scorer, &schedules)
}

/// Smallest `p` attaining the maximal mean ratio.
pub fn extract_p_max(curve: &BenchmarkCurve) -> Option<usize> {
    let best = curve
        .points()
        .iter()
        .map(|pt| pt.mean_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    curve
        .points()
        .iter()
        .find(|pt| pt.mean_ratio == best)
        .map(|pt| pt.p)
}

/// Smallest `p ≥ p_max` whose mean ratio has fallen to the baseline's 60th
/// percentile, or `None` if the curve never gets there.
pub fn extract_p_noise(curve: &BenchmarkCurve, baseline: &Baseline) -> Option<usize> {
    let p_max = extract_p_max(curve)?;
    curve
        .points()
        .iter()
        .filter(|pt| pt.p >= p_max)
        .find(|pt| pt.mean_ratio <= baseline.pct60)
        .map(|pt| pt.p)
}

pub fn qaoa_volume(n: usize, p: usize) -> usize {
    n * p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub p_max: Option<usize>,
    pub p_noise: Option<usize>,
    /// `n · p_max`.
    pub qaoa_volume: Option<usize>,
}

pub fn summarize(curve: &BenchmarkCurve, baseline: &Baseline) -> CurveSummary {
    let p_max = extract_p_max(curve);
    CurveSummary {
        p_max,
        p_noise: extract_p_noise(curve, baseline),
        qaoa_volume: p_max.map(|p| qaoa_volume(curve.n, p)),
    }
}

pub const CSV_HEADER: &str =
    "p,mean,pct40,pct60,n_shots,source,baseline_mean,baseline_pct40,baseline_pct60";

/// One row per round, with the baseline repeated on every row.
pub fn write_curve_csv<W: Write>(mut w: W, curve: &BenchmarkCurve, baseline: &Baseline) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for pt in curve.points() {
        writeln!(
            w,
            "{},{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{:.6}",
            pt.p,
            pt.mean_ratio,
            pt.pct40,
            pt.pct60,
            pt.n_shots,
            pt.source,
            baseline.mean_ratio,
            baseline.pct40,
            baseline.pct60
        )?;
    }
    Ok(())
}

/// Line chart of ratio against `p`: baseline band, one polyline per curve,
/// with shot curves also drawn as individual sample dots.
pub fn render_svg(curves: &[&BenchmarkCurve], baseline: &Baseline) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 48.0;
    let p_hi = curves
        .iter()
        .flat_map(|c| c.points().iter().map(|pt| pt.p))
        .max()
        .unwrap_or(1)
        .max(2);
    let y_lo = curves
        .iter()
        .flat_map(|c| c.points().iter().flat_map(|pt| pt.sample_ratios.iter().copied().chain([pt.mean_ratio])))
        .chain([baseline.pct40])
        .fold(1.0f64, f64::min)
        .min(0.5);
    let sx = |p: f64| PAD + (p - 1.0) / (p_hi as f64 - 1.0) * (W - 2.0 * PAD);
    let sy = |r: f64| H - PAD - (r - y_lo) / (1.0 - y_lo) * (H - 2.0 * PAD);

    let mut s = String::new();
    s += &format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += &format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#cccccc\" opacity=\"0.6\"/>\n",
        PAD,
        sy(baseline.pct60),
        W - 2.0 * PAD,
        (sy(baseline.pct40) - sy(baseline.pct60)).max(0.5)
    );
    s += &format!(
        "<line x1=\"{PAD}\" y1=\"{y}\" x2=\"{PAD}\" y2=\"{PAD}\" stroke=\"black\"/>\n<line x1=\"{PAD}\" y1=\"{y}\" x2=\"{x}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = H - PAD,
        x = W - PAD
    );
    for p in 1..=p_hi {
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{p}</text>\n",
            sx(p as f64),
            H - PAD + 14.0
        );
    }
    for tick in 0..=4 {
        let r = y_lo + (1.0 - y_lo) * tick as f64 / 4.0;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{r:.2}</text>\n",
            PAD - 4.0,
            sy(r) + 3.0
        );
    }
    s += &format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">rounds p</text>\n",
        W / 2.0,
        H - 10.0
    );
    s += &format!(
        "<text x=\"14\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">approximation ratio</text>\n",
        H / 2.0,
        H / 2.0
    );
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    for (i, c) in curves.iter().enumerate() {
        let color = colors[i % colors.len()];
        for pt in c.points() {
            for r in &pt.sample_ratios {
                s += &format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.5\" fill=\"{color}\" opacity=\"0.3\"/>\n",
                    sx(pt.p as f64),
                    sy(*r)
                );
            }
        }
        let path: Vec<String> = c
            .points()
            .iter()
            .map(|pt| format!("{:.1},{:.1}", sx(pt.p as f64), sy(pt.mean_ratio)))
            .collect();
        s += &format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            path.join(" ")
        );
    }
    s += "</svg>\n";
    s
}
