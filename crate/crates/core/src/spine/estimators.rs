//! Many-to-one estimators and spine diagnostics.

use serde::Serialize;

use crate::environment::EnvironmentLaw;
use crate::estimate::{Estimate, EstimatorKind, RunningStats, WeightedStats};
use crate::rng::{self, purpose};
use crate::{Error, Result};

use super::sampler::{sample_spine_path, sample_spine_to_level, SpineMode, SpineSample};

/// Default cap on spine steps per first-passage sample.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

// stream tags, one per estimator
const TAG_GENERATION: u64 = 1;
const TAG_LINE: u64 = 2;
const TAG_OVERSHOOT: u64 = 3;
const TAG_MU: u64 = 4;
const TAG_MARTINGALE: u64 = 5;
const TAG_C1: u64 = 6;

/// Sample count, seed, sampling mode and first-passage step cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpineConfig {
    pub samples: u64,
    pub seed: u64,
    pub mode: SpineMode,
    pub step_cap: u64,
}

impl SpineConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            mode: SpineMode::Exact,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_mode(mut self, mode: SpineMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }

    fn rng(&self, tag: u64, i: u64) -> rng::StreamRng {
        rng::stream(&[self.seed, purpose::SPINE, tag, i])
    }
}

/// Plain mean in exact mode, self-normalized mean in weighted mode.
enum Accumulator {
    Plain(RunningStats),
    Weighted(WeightedStats),
}

impl Accumulator {
    fn new(mode: SpineMode) -> Self {
        match mode {
            SpineMode::Exact => Accumulator::Plain(RunningStats::new()),
            SpineMode::Weighted => Accumulator::Weighted(WeightedStats::new()),
        }
    }

    fn push(&mut self, log_weight: f64, value: f64) {
        match self {
            Accumulator::Plain(s) => s.push(value),
            Accumulator::Weighted(s) => s.push(log_weight.exp(), value),
        }
    }

    fn estimate(&self) -> Estimate {
        match self {
            Accumulator::Plain(s) => s.estimate(EstimatorKind::QMonteCarlo),
            Accumulator::Weighted(s) => s.estimate(),
        }
    }
}

/// `e^{S + ln g}` without forming `e^S` separately.
fn tilt(s: f64, ln_g: f64) -> f64 {
    if ln_g == f64::NEG_INFINITY {
        0.0
    } else {
        (s + ln_g).exp()
    }
}

/// Estimate `E[sum_{|x|=n} g(x)]` as `E_Q[e^{S_n} g]`.
///
/// `ln_g` receives the spine sample and returns `ln g` (`-inf` for zero).
pub fn many_to_one<F>(
    law: &EnvironmentLaw,
    n: usize,
    ln_g: F,
    cfg: &SpineConfig,
) -> Result<Estimate>
where
    F: Fn(&SpineSample) -> f64,
{
    if n == 0 {
        return Err(Error::Usage("many_to_one needs n >= 1".into()));
    }
    let mut acc = Accumulator::new(cfg.mode);
    let mut path = SpineSample::default();
    for i in 0..cfg.samples {
        let mut r = cfg.rng(TAG_GENERATION, i);
        sample_spine_path(law, &mut r, cfg.mode, n, &mut path);
        acc.push(path.log_weight, tilt(path.end(), ln_g(&path)));
    }
    Ok(acc.estimate())
}

/// Estimate with the number of samples dropped at the step cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineEstimate {
    pub estimate: Estimate,
    pub discards: u64,
}

impl LineEstimate {
    pub fn discard_fraction(&self) -> f64 {
        let total = self.estimate.samples + self.discards;
        if total == 0 {
            0.0
        } else {
            self.discards as f64 / total as f64
        }
    }
}

/// Estimate `E[sum_{x in H_r} g(x)]` over the first-passage line at level `r`
/// as `E_Q[e^{S_H} g]`, running each spine until `S >= r`.
///
/// Spines that exhaust the step cap are discarded and counted. Discards bias
/// the estimate and are reported alongside it.
pub fn many_to_one_line<F>(
    law: &EnvironmentLaw,
    r: f64,
    ln_g: F,
    cfg: &SpineConfig,
) -> Result<LineEstimate>
where
    F: Fn(&SpineSample) -> f64,
{
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Usage(format!(
            "many_to_one_line needs r > 0, got {r}"
        )));
    }
    let mut acc = Accumulator::new(cfg.mode);
    let mut discards = 0;
    let mut path = SpineSample::default();
    for i in 0..cfg.samples {
        let mut rg = cfg.rng(TAG_LINE, i);
        if sample_spine_to_level(law, &mut rg, cfg.mode, r, cfg.step_cap, &mut path) {
            acc.push(path.log_weight, tilt(path.end(), ln_g(&path)));
        } else {
            discards += 1;
        }
    }
    Ok(LineEstimate {
        estimate: acc.estimate(),
        discards,
    })
}

/// Exponential overshoot moments at one level `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OvershootPoint {
    pub b: f64,
    /// `E_Q[exp(c (S_H - S_{H-1}))]`: the jump that crosses `b`.
    pub jump: Estimate,
    /// `E_Q[exp(c (S_H - b))]`: the excess over `b`.
    pub excess: Estimate,
    /// Set when the full-sample estimate exceeds the first-quarter estimate by
    /// more than three of its standard errors.
    pub diverging: bool,
    pub discards: u64,
}

fn growing(quarter: &Estimate, full: &Estimate) -> bool {
    full.value - quarter.value > 3.0 * quarter.stderr.max(full.stderr)
}

/// Overshoot moments across `b_grid`, one spine per sample run to the top level.
pub fn overshoot_moment(
    law: &EnvironmentLaw,
    c: f64,
    b_grid: &[f64],
    cfg: &SpineConfig,
) -> Result<Vec<OvershootPoint>> {
    if !(c >= 0.0) {
        return Err(Error::Usage(format!(
            "overshoot exponent must be >= 0, got {c}"
        )));
    }
    if b_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::Usage("overshoot levels must be positive".into()));
    }
    let mut order: Vec<usize> = (0..b_grid.len()).collect();
    order.sort_by(|&i, &j| b_grid[i].total_cmp(&b_grid[j]));
    let top = order.last().map(|&i| b_grid[i]).unwrap_or(0.0);

    let k = b_grid.len();
    let mut jump: Vec<Accumulator> = (0..k).map(|_| Accumulator::new(cfg.mode)).collect();
    let mut excess: Vec<Accumulator> = (0..k).map(|_| Accumulator::new(cfg.mode)).collect();
    let mut jump_q = Vec::new();
    let mut discards = vec![0u64; k];
    let mut path = SpineSample::default();
    let quarter = cfg.samples / 4;
    for i in 0..cfg.samples {
        if i == quarter {
            jump_q = jump.iter().map(|a| a.estimate()).collect();
        }
        let mut rg = cfg.rng(TAG_OVERSHOOT, i);
        sample_spine_to_level(law, &mut rg, cfg.mode, top, cfg.step_cap, &mut path);
        // walk the recorded path once, resolving levels in increasing order
        let mut idx = 0;
        for &g in &order {
            let b = b_grid[g];
            while idx < path.len() && path.positions[idx] < b {
                idx += 1;
            }
            if idx == path.len() {
                discards[g] += 1;
                continue;
            }
            let lw = path.log_weight;
            jump[g].push(lw, (c * path.increment(idx + 1)).exp());
            excess[g].push(lw, (c * (path.positions[idx] - b)).exp());
        }
    }
    Ok((0..k)
        .map(|g| {
            let full = jump[g].estimate();
            OvershootPoint {
                b: b_grid[g],
                jump: full,
                excess: excess[g].estimate(),
                diverging: jump_q.get(g).is_some_and(|q| growing(q, &full)),
                discards: discards[g],
            }
        })
        .collect())
}

/// The events kept in the `mu_L` expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MuIndicators {
    /// `S_L >= L^alpha`, `max S < 2 L^alpha` and `prod (1 + eta_j) <= e^{c4 L}`.
    All,
    /// No indicator: the estimate targets the mean generation size.
    None,
}

/// Estimate `mu_L = E_Q[e^{S_L}; S_L >= L^a, max_{j<=L} S_j < 2 L^a, prod (1+eta_j) <= e^{c4 L}]`
/// with `eta_j = Lambda(w_{j-1})`.
pub fn mu_l(
    law: &EnvironmentLaw,
    l: usize,
    alpha: f64,
    c4: f64,
    indicators: MuIndicators,
    cfg: &SpineConfig,
) -> Result<Estimate> {
    if l == 0 {
        return Err(Error::Usage("mu_L needs L >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Usage(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    if !(c4 > 0.0) {
        return Err(Error::Usage(format!("c4 must be positive, got {c4}")));
    }
    let gain = (l as f64).powf(alpha);
    let log_cap = c4 * l as f64;
    let mut acc = Accumulator::new(cfg.mode);
    let mut path = SpineSample::default();
    for i in 0..cfg.samples {
        let mut rg = cfg.rng(TAG_MU, i);
        sample_spine_path(law, &mut rg, cfg.mode, l, &mut path);
        let keep = match indicators {
            MuIndicators::None => true,
            MuIndicators::All => {
                path.end() >= gain
                    && path.running_max() < 2.0 * gain
                    && path.lambdas.iter().map(|e| e.ln_1p()).sum::<f64>() <= log_cap
            }
        };
        acc.push(path.log_weight, if keep { path.end().exp() } else { 0.0 });
    }
    Ok(acc.estimate())
}

/// Direct-simulation estimate of `E[W_n]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleCheck {
    pub estimate: Estimate,
    /// Closed-form `E[W_n^2]`.
    pub second_moment: f64,
    /// `sqrt((E[W_n^2] - 1) / samples)`, the standard error implied by the
    /// closed-form variance.
    pub model_stderr: f64,
    /// Set when the sample misses the events that carry the variance: the
    /// empirical second moment is below half the closed form, or the two
    /// halves of the sample disagree on the standard error by a factor of two.
    /// The sample standard error is then unreliable; use `model_stderr`.
    pub heavy_tail: bool,
}

/// Closed form of `E[W_n^2]`.
///
/// Pairs of generation-`n` vertices split by their last common ancestor `z`:
/// `E[W_n^2] = t^n + (E[W_1^2] - t) (t^n - 1) / (t - 1)` with
/// `t = E[sum e^{-2V}]`.
pub fn wn_second_moment(law: &EnvironmentLaw, n: usize) -> f64 {
    let t = law.tilted_moment(2.0, 0);
    let cross = w1_second_moment(law) - t;
    let geometric = if (t - 1.0).abs() < 1e-12 {
        n as f64
    } else {
        (t.powi(n as i32) - 1.0) / (t - 1.0)
    };
    t.powi(n as i32) + cross * geometric
}

/// Simulate `W_n = sum_{|x|=n} e^{-V(x)}` over fresh trees.
///
/// Trees are grown generation by generation; `max_population` bounds the size
/// of any one generation.
pub fn martingale_check(
    law: &EnvironmentLaw,
    n: usize,
    samples: u64,
    seed: u64,
    max_population: usize,
) -> Result<MartingaleCheck> {
    if n == 0 {
        return Ok(MartingaleCheck {
            estimate: Estimate::exact(1.0),
            second_moment: 1.0,
            model_stderr: 0.0,
            heavy_tail: false,
        });
    }
    let mut halves = [RunningStats::new(), RunningStats::new()];
    let mut squares = 0.0;
    let mut gen: Vec<f64> = Vec::new();
    let mut next: Vec<f64> = Vec::new();
    let mut family = Vec::new();
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::SPINE, TAG_MARTINGALE, i]);
        gen.clear();
        gen.push(0.0);
        for _ in 0..n {
            next.clear();
            for &v in &gen {
                law.sample_children(&mut rg, &mut family);
                next.extend(family.iter().map(|d| v + d));
            }
            if next.len() > max_population {
                return Err(Error::Budget(format!(
                    "generation of {} vertices exceeds the population cap {max_population}",
                    next.len()
                )));
            }
            std::mem::swap(&mut gen, &mut next);
        }
        let w: f64 = gen.iter().map(|v| (-v).exp()).sum();
        squares += w * w;
        halves[(2 * i / samples.max(1)) as usize].push(w);
    }
    let (a, b) = (halves[0].stderr(), halves[1].stderr());
    let second_moment = wn_second_moment(law, n);
    let unstable = a.is_finite() && b.is_finite() && (a > 2.0 * b || b > 2.0 * a);
    let missed = samples > 0 && squares / (samples as f64) < 0.5 * second_moment;
    let mut all = halves[0];
    all.merge(&halves[1]);
    Ok(MartingaleCheck {
        estimate: all.estimate(EstimatorKind::DirectMonteCarlo),
        second_moment,
        model_stderr: ((second_moment - 1.0).max(0.0) / samples.max(1) as f64).sqrt(),
        heavy_tail: unstable || missed,
    })
}

/// Closed form of `E[W_1^2] = E[sum e^{-2V}] + E[N(N-1)] / m^2`.
///
/// Children are exchangeable with marginal mean `E[e^{-V}] = 1/m`, and distinct
/// children are independent given `N`.
pub fn w1_second_moment(law: &EnvironmentLaw) -> f64 {
    let m = law.offspring_mean();
    let falling = law.offspring_power_moment(2.0) - m;
    law.tilted_moment(2.0, 0) + falling / (m * m)
}

/// Lower threshold for `c4` with `delta_1 = 1`: `ln(1 + E_Q[Lambda]) = ln(1 + E[W_1^2])`.
pub fn c4_threshold(law: &EnvironmentLaw) -> f64 {
    w1_second_moment(law).ln_1p()
}

/// Empirical moment `E[W_1^{1+c}]` at one exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentProbe {
    pub c: f64,
    pub estimate: Estimate,
    /// Relative standard error below 10% and no drift between sample halves.
    pub stable: bool,
}

/// Probe `E[W_1^{1+c}]` on a grid of exponents. The largest exponent whose
/// estimate looks stable is an empirical proxy for how many moments exist.
pub fn probe_c1(law: &EnvironmentLaw, cs: &[f64], samples: u64, seed: u64) -> Vec<MomentProbe> {
    let mut family = Vec::new();
    let mut draws = Vec::with_capacity(samples as usize);
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::SPINE, TAG_C1, i]);
        law.sample_children(&mut rg, &mut family);
        draws.push(family.iter().map(|v| (-v).exp()).sum::<f64>());
    }
    let half = draws.len() / 2;
    cs.iter()
        .map(|&c| {
            let mut parts = [RunningStats::new(), RunningStats::new()];
            for (i, w) in draws.iter().enumerate() {
                parts[usize::from(i >= half)].push(w.powf(1.0 + c));
            }
            let z = parts[0]
                .estimate(EstimatorKind::DirectMonteCarlo)
                .z_between(&parts[1].estimate(EstimatorKind::DirectMonteCarlo));
            let mut all = parts[0];
            all.merge(&parts[1]);
            let estimate = all.estimate(EstimatorKind::DirectMonteCarlo);
            let stable = estimate.stderr < 0.1 * estimate.value.abs() && z < 4.0;
            MomentProbe {
                c,
                estimate,
                stable,
            }
        })
        .collect()
}
