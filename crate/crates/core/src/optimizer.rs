//! QAOA angle search: basin-hopping around a local gradient ascent on the
//! exact expectation value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::circuit::AngleSchedule;
use crate::error::{Error, Result};
use crate::fastsim::QaoaEvaluator;

/// Starting angles for a fresh search: `(0.1, 0.1)` in every round. Zero is
/// avoided because the uniform state is stationary in γ there.
pub const DEFAULT_INIT_ANGLE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    pub max_iterations: usize,
    /// Stop once the gradient ∞-norm falls below this.
    pub gradient_tolerance: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-7,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub angles: AngleSchedule,
    pub expectation: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

fn checked(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericalFailure(format!("objective evaluated to {value}")))
    }
}

/// Gradient ascent on `⟨H_C⟩` with a backtracking line search. Step lengths
/// are seeded with a Barzilai–Borwein estimate and only steps meeting the
/// Armijo condition are accepted, so the objective never decreases.
pub fn local_descent(
    eval: &QaoaEvaluator,
    init: &AngleSchedule,
    config: &DescentConfig,
) -> Result<DescentOutcome> {
    let mut x = init.to_flat();
    let (f0, mut g) = eval.value_and_gradient(init);
    let mut f = checked(f0)?;
    let mut trace = vec![f];
    let mut step = 0.05;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iterations {
        let g_inf = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if g_inf < config.gradient_tolerance {
            converged = true;
            break;
        }
        let g_sq: f64 = g.iter().map(|v| v * v).sum();
        let mut t = step;
        let accepted = loop {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + t * gi).collect();
            let angles = AngleSchedule::from_flat(&cand)?;
            let (fc, gc) = eval.value_and_gradient(&angles);
            let fc = checked(fc)?;
            if fc >= f + config.armijo * t * g_sq {
                break Some((cand, fc, gc));
            }
            t *= 0.5;
            if t < 1e-14 {
                break None;
            }
        };
        iterations += 1;
        let Some((cand, fc, gc)) = accepted else {
            break;
        };
        // BB1 step for the next iteration (ascent sign)
        let s: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        let sy: f64 = s.iter().zip(gc.iter().zip(&g)).map(|(si, (a, b))| -si * (a - b)).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-6, 10.0) } else { (2.0 * t).min(10.0) };
        x = cand;
        f = fc;
        g = gc;
        trace.push(f);
    }

    Ok(DescentOutcome {
        angles: AngleSchedule::from_flat(&x)?,
        expectation: f,
        iterations,
        converged,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinHoppingConfig {
    pub hops: usize,
    /// Standard deviation of the Gaussian perturbation, radians.
    pub step_sigma: f64,
    pub descent: DescentConfig,
}

impl Default for BasinHoppingConfig {
    fn default() -> Self {
        Self {
            hops: 10,
            step_sigma: 0.3,
            descent: DescentConfig::default(),
        }
    }
}

impl BasinHoppingConfig {
    pub fn with_hops(hops: usize) -> Self {
        Self {
            hops,
            ..Self::default()
        }
    }
}

/// Best angles found for one `(instance, p)`. Also the on-disk angle file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub instance_id: String,
    pub p: usize,
    #[serde(flatten)]
    pub angles: AngleSchedule,
    pub expectation: f64,
    pub ideal_ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub hops: usize,
    #[serde(default)]
    pub iterations: usize,
    /// Best objective after the initial descent and after each hop.
    #[serde(default)]
    pub trace: Vec<f64>,
}

impl OptimizationResult {
    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        // re-run the constructor checks skipped by the derive
        AngleSchedule::new(r.angles.gammas().to_vec(), r.angles.betas().to_vec())?;
        if r.angles.p() != r.p {
            return Err(Error::InvalidParameters(format!(
                "angle file declares p = {} but holds {} rounds",
                r.p,
                r.angles.p()
            )));
        }
        Ok(r)
    }
}

/// Basin-hopping from `init`: descend, then repeatedly perturb the incumbent,
/// descend again and keep the result only if it improves (monotone
/// acceptance). Angles are wrapped to `γ ∈ [0, 2π)`, `β ∈ [0, π)` and every
/// reported value is the expectation at the wrapped angles.
pub fn basin_hopping_from(
    eval: &QaoaEvaluator,
    instance_id: &str,
    init: &AngleSchedule,
    config: &BasinHoppingConfig,
    seed: u64,
) -> Result<OptimizationResult> {
    let c_opt = eval.table().max() as f64;
    if c_opt <= 0.0 {
        return Err(Error::InvalidParameters("instance has C_opt = 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, config.step_sigma)
        .map_err(|e| Error::InvalidParameters(e.to_string()))?;

    let mut best = init.wrapped();
    let mut best_value = checked(eval.expectation(&best))?;
    let mut iterations = 0;
    let mut trace = Vec::with_capacity(config.hops + 1);

    let mut try_from = |start: &AngleSchedule,
                        best: &mut AngleSchedule,
                        best_value: &mut f64|
     -> Result<()> {
        let d = local_descent(eval, start, &config.descent)?;
        iterations += d.iterations;
        let cand = d.angles.wrapped();
        let value = checked(eval.expectation(&cand))?;
        if value > *best_value {
            *best = cand;
            *best_value = value;
        }
        Ok(())
    };

    let start = best.clone();
    try_from(&start, &mut best, &mut best_value)?;
    trace.push(best_value);
    for _ in 0..config.hops {
        let flat: Vec<f64> = best
            .to_flat()
            .iter()
            .map(|a| a + normal.sample(&mut rng))
            .collect();
        let start = AngleSchedule::from_flat(&flat)?.wrapped();
        try_from(&start, &mut best, &mut best_value)?;
        trace.push(best_value);
    }

    Ok(OptimizationResult {
        instance_id: instance_id.to_string(),
        p: best.p(),
        angles: best,
        expectation: best_value,
        ideal_ratio: best_value / c_opt,
        seed,
        hops: config.hops,
        iterations,
        trace,
    })
}

/// Basin-hopping for `p` rounds from the default starting point.
pub fn basin_hopping(
    eval: &QaoaEvaluator,
    instance_id: &str,
    p: usize,
    hops: usize,
    seed: u64,
) -> Result<OptimizationResult> {
    let init = AngleSchedule::constant(p, DEFAULT_INIT_ANGLE, DEFAULT_INIT_ANGLE)?;
    basin_hopping_from(eval, instance_id, &init, &BasinHoppingConfig::with_hops(hops), seed)
}

/// `p + 1` round schedule: the previous optimum followed by an identity round.
pub fn warm_start(prev: &OptimizationResult) -> AngleSchedule {
    prev.angles.extended(0.0, 0.0)
}

/// Sweeps `p_min..=p_max`, warm-starting each round count from the previous
/// optimum. Round `p` uses seed `seed + p`. Stops after the first result
/// whose ideal ratio exceeds `stop_ratio`.
pub fn optimize_sweep(
    eval: &QaoaEvaluator,
    instance_id: &str,
    p_min: usize,
    p_max: usize,
    config: &BasinHoppingConfig,
    seed: u64,
    stop_ratio: Option<f64>,
) -> Result<Vec<OptimizationResult>> {
    if p_min == 0 || p_min > p_max {
        return Err(Error::InvalidParameters(format!(
            "bad round range {p_min}..={p_max}"
        )));
    }
    let mut out: Vec<OptimizationResult> = Vec::new();
    for p in p_min..=p_max {
        let init = match out.last() {
            Some(prev) => warm_start(prev),
            None => AngleSchedule::constant(p, DEFAULT_INIT_ANGLE, DEFAULT_INIT_ANGLE)?,
        };
        let r = basin_hopping_from(eval, instance_id, &init, config, seed.wrapping_add(p as u64))?;
        let done = stop_ratio.is_some_and(|s| r.ideal_ratio > s);
        out.push(r);
        if done {
            break;
        }
    }
    Ok(out)
}
