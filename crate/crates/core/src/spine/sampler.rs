//! Sampling the spine of the size-biased branching random walk.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::Serialize;

use crate::environment::EnvironmentLaw;

/// How spine steps are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpineMode {
    /// Draw directly from the size-biased law; every weight is 1.
    Exact,
    /// Draw the family from the base law, pick the spine child with probability
    /// `e^{-V}/W_1` and carry the weight `W_1`.
    Weighted,
}

/// One generation of the spine: the spine increment, the displacements of its
/// siblings and `Lambda = sum e^{-dV}` over the whole family.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpineStep {
    pub ds: f64,
    pub siblings: Vec<f64>,
    pub lambda: f64,
    pub weight: f64,
}

/// The four ordered families of the two-point law with their base probabilities.
pub fn two_point_families(jump: f64, p_up: f64) -> [([f64; 2], f64); 4] {
    let q = 1.0 - p_up;
    [
        ([jump, jump], p_up * p_up),
        ([jump, -jump], p_up * q),
        ([-jump, jump], q * p_up),
        ([-jump, -jump], q * q),
    ]
}

/// Draw one spine generation.
///
/// Under the size-biased law a family `F` with spine child `j` has probability
/// `P(F) e^{-dV_j}`. For the two-point law the four families are enumerated.
/// For Gaussian displacements the tilt moves the spine increment to
/// `N(mu - s^2, s^2) = N(0, s^2)`, leaves the siblings alone, and size-biases
/// the offspring count (`1 + Poisson(lambda)` in the Poisson family).
pub fn sample_spine_step<R: Rng + ?Sized>(
    law: &EnvironmentLaw,
    rng: &mut R,
    mode: SpineMode,
    out: &mut SpineStep,
) {
    out.siblings.clear();
    out.weight = 1.0;
    match mode {
        SpineMode::Exact => sample_exact(law, rng, out),
        SpineMode::Weighted => sample_weighted(law, rng, out),
    }
}

fn sample_exact<R: Rng + ?Sized>(law: &EnvironmentLaw, rng: &mut R, out: &mut SpineStep) {
    match *law {
        EnvironmentLaw::TwoPoint { jump, p_up } => {
            let fams = two_point_families(jump, p_up);
            // Q(F, j) = P(F) e^{-dV_j}; the eight masses sum to one
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = (fams[3].0, 1usize);
            'outer: for (dvs, p) in fams {
                for j in 0..2 {
                    acc += p * (-dvs[j]).exp();
                    if u < acc {
                        pick = (dvs, j);
                        break 'outer;
                    }
                }
            }
            let (dvs, j) = pick;
            out.ds = dvs[j];
            out.siblings.push(dvs[1 - j]);
        }
        EnvironmentLaw::FixedGaussian {
            branching,
            mean,
            variance,
        } => {
            let sd = variance.sqrt();
            out.ds = Normal::new(mean - variance, sd)
                .expect("valid normal")
                .sample(rng);
            let base = Normal::new(mean, sd).expect("valid normal");
            out.siblings
                .extend((1..branching).map(|_| base.sample(rng)));
        }
        EnvironmentLaw::PoissonGaussian {
            offspring_mean,
            mean,
            variance,
        } => {
            let sd = variance.sqrt();
            out.ds = Normal::new(mean - variance, sd)
                .expect("valid normal")
                .sample(rng);
            let extra = Poisson::new(offspring_mean)
                .expect("valid poisson")
                .sample(rng) as usize;
            let base = Normal::new(mean, sd).expect("valid normal");
            out.siblings.extend((0..extra).map(|_| base.sample(rng)));
        }
    }
    out.lambda = (-out.ds).exp() + out.siblings.iter().map(|v| (-v).exp()).sum::<f64>();
}

fn sample_weighted<R: Rng + ?Sized>(law: &EnvironmentLaw, rng: &mut R, out: &mut SpineStep) {
    let mut family = Vec::new();
    law.sample_children(rng, &mut family);
    let w1: f64 = family.iter().map(|v| (-v).exp()).sum();
    out.lambda = w1;
    out.weight = w1;
    if family.is_empty() {
        // zero weight: the sample drops out of every weighted average
        out.ds = 0.0;
        return;
    }
    let u = rng.random::<f64>() * w1;
    let mut acc = 0.0;
    let mut j = family.len() - 1;
    for (i, v) in family.iter().enumerate() {
        acc += (-v).exp();
        if u < acc {
            j = i;
            break;
        }
    }
    out.ds = family[j];
    out.siblings.extend(
        family
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &v)| v),
    );
}

/// A finite stretch of the spine.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpineSample {
    /// `S_1, ..., S_n`.
    pub positions: Vec<f64>,
    /// `Lambda(w_0), ..., Lambda(w_{n-1})`: `e^{-dV}` summed over every child of
    /// the previous spine vertex, spine child included.
    pub lambdas: Vec<f64>,
    /// The same sum restricted to the siblings of the spine child.
    pub sibling_sums: Vec<f64>,
    /// Sum of `ln W_1` over the steps (zero in exact mode).
    pub log_weight: f64,
}

impl SpineSample {
    pub fn clear(&mut self) {
        self.positions.clear();
        self.lambdas.clear();
        self.sibling_sums.clear();
        self.log_weight = 0.0;
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `S_n` (0 for the empty path).
    pub fn end(&self) -> f64 {
        self.positions.last().copied().unwrap_or(0.0)
    }

    /// `max_{0 <= i <= n} S_i`.
    pub fn running_max(&self) -> f64 {
        self.positions.iter().copied().fold(0.0, f64::max)
    }

    /// Increment `S_i - S_{i-1}` for `1 <= i <= n`.
    pub fn increment(&self, i: usize) -> f64 {
        let prev = if i == 1 { 0.0 } else { self.positions[i - 2] };
        self.positions[i - 1] - prev
    }

    fn push(&mut self, step: &SpineStep) {
        let s = self.end() + step.ds;
        self.positions.push(s);
        self.lambdas.push(step.lambda);
        self.sibling_sums
            .push(step.siblings.iter().map(|v| (-v).exp()).sum());
        self.log_weight += step.weight.ln();
    }
}

/// Fill `path` with the first `n` spine generations.
pub fn sample_spine_path<R: Rng + ?Sized>(
    law: &EnvironmentLaw,
    rng: &mut R,
    mode: SpineMode,
    n: usize,
    path: &mut SpineSample,
) {
    path.clear();
    let mut step = SpineStep::default();
    for _ in 0..n {
        sample_spine_step(law, rng, mode, &mut step);
        path.push(&step);
    }
}

/// Run the spine until `S >= r`. Returns false if `step_cap` steps pass first.
pub fn sample_spine_to_level<R: Rng + ?Sized>(
    law: &EnvironmentLaw,
    rng: &mut R,
    mode: SpineMode,
    r: f64,
    step_cap: u64,
    path: &mut SpineSample,
) -> bool {
    path.clear();
    if r <= 0.0 {
        return true;
    }
    let mut step = SpineStep::default();
    for _ in 0..step_cap {
        sample_spine_step(law, rng, mode, &mut step);
        path.push(&step);
        if path.end() >= r {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{EstimatorKind, RunningStats, WeightedStats};
    use crate::rng;
    use crate::spine::two_point_step_law;

    fn steps(law: &EnvironmentLaw, mode: SpineMode, n: u64, seed: u64) -> Vec<SpineStep> {
        let mut rg = rng::stream(&[seed]);
        (0..n)
            .map(|_| {
                let mut s = SpineStep::default();
                sample_spine_step(law, &mut rg, mode, &mut s);
                s
            })
            .collect()
    }

    #[test]
    fn two_point_spine_matches_enumerated_law() {
        let law = EnvironmentLaw::two_point();
        let n = 1_000_000;
        let draws = steps(&law, SpineMode::Exact, n, 7);
        let q = two_point_step_law(&law).unwrap();
        let mut tv = 0.0;
        for &(ds, sib, p) in &q {
            let k = draws
                .iter()
                .filter(|s| s.ds == ds && s.siblings == [sib])
                .count() as f64;
            let freq = k / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 4.0 * se, "{ds} {sib}: {freq} vs {p}");
            tv += 0.5 * (freq - p).abs();
        }
        assert!(tv < 0.01);
        let mut st = RunningStats::new();
        draws.iter().for_each(|s| st.push(s.ds));
        assert!(st.estimate(EstimatorKind::QMonteCarlo).within(0.0, 4.0));
        assert!(draws.iter().all(|s| s.weight == 1.0));
    }

    #[test]
    fn spine_increment_is_centered_with_variance_sigma2() {
        let laws = [
            EnvironmentLaw::two_point(),
            EnvironmentLaw::fixed_gaussian(2).unwrap(),
            EnvironmentLaw::fixed_gaussian(5).unwrap(),
            EnvironmentLaw::poisson_gaussian(1.7).unwrap(),
        ];
        for (i, law) in laws.iter().enumerate() {
            for mode in [SpineMode::Exact, SpineMode::Weighted] {
                let draws = steps(law, mode, 200_000, 100 + i as u64);
                let mut m1 = WeightedStats::new();
                let mut m2 = WeightedStats::new();
                for s in &draws {
                    m1.push(s.weight, s.ds);
                    m2.push(s.weight, s.ds * s.ds);
                }
                let (e1, e2) = (m1.estimate(), m2.estimate());
                assert!(e1.within(0.0, 4.0), "{law:?} {mode:?} mean {e1:?}");
                let exact = (e2.value - law.sigma2()).abs() < 1e-10 * law.sigma2();
                assert!(
                    exact || e2.within(law.sigma2(), 4.0),
                    "{law:?} {mode:?} second {e2:?}"
                );
            }
        }
    }

    #[test]
    fn poisson_spine_has_size_biased_siblings() {
        // E_Q[#siblings] = E[N^2]/m - 1 = lambda
        let law = EnvironmentLaw::poisson_gaussian(1.7).unwrap();
        let draws = steps(&law, SpineMode::Exact, 200_000, 3);
        let mut st = RunningStats::new();
        draws.iter().for_each(|s| st.push(s.siblings.len() as f64));
        assert!(st.estimate(EstimatorKind::QMonteCarlo).within(1.7, 4.0));
    }

    #[test]
    fn lambda_sums_the_whole_family() {
        let law = EnvironmentLaw::fixed_gaussian(3).unwrap();
        for s in steps(&law, SpineMode::Exact, 100, 5) {
            let direct = (-s.ds).exp() + s.siblings.iter().map(|v| (-v).exp()).sum::<f64>();
            assert_eq!(s.siblings.len(), 2);
            assert!((s.lambda - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn paths_accumulate_increments() {
        let law = EnvironmentLaw::fixed_gaussian(2).unwrap();
        let mut rg = rng::stream(&[9]);
        let mut p = SpineSample::default();
        sample_spine_path(&law, &mut rg, SpineMode::Weighted, 12, &mut p);
        assert_eq!(p.len(), 12);
        let total: f64 = (1..=12).map(|i| p.increment(i)).sum();
        assert!((total - p.end()).abs() < 1e-9);
        assert!(p.running_max() >= p.end().max(0.0));
        assert!(p.log_weight.is_finite());
        assert!(sample_spine_to_level(
            &law,
            &mut rg,
            SpineMode::Exact,
            2.0,
            1_000_000,
            &mut p
        ));
        assert!(p.end() >= 2.0);
        assert!(p.positions[..p.len() - 1].iter().all(|&s| s < 2.0));
    }
}
