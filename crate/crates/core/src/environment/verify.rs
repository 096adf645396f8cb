//! Checks of the boundary-case and integrability conditions of a law.

use serde::Serialize;

use crate::environment::law::EnvironmentLaw;
use crate::estimate::{Estimate, EstimatorKind, RunningStats};
use crate::rng::{self, purpose};

/// How [`verify_boundary_case`] evaluates the expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerifyMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// Probe levels for the integrability moments.
pub const DELTA_PROBES: [f64; 3] = [0.1, 0.25, 0.5];

/// The three expectations of the integrability condition at one `delta`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaProbe {
    pub delta: f64,
    /// `E[sum e^{-(1+delta) V}]`
    pub neg_tilt: Estimate,
    /// `E[sum e^{delta V}]`
    pub pos_tilt: Estimate,
    /// `E[N^{1+delta}]`
    pub count_moment: Estimate,
}

impl DeltaProbe {
    pub fn is_finite(&self) -> bool {
        self.neg_tilt.value.is_finite()
            && self.pos_tilt.value.is_finite()
            && self.count_moment.value.is_finite()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub method: VerifyMethod,
    /// `E[sum e^{-V}]`, should be 1.
    pub m0: Estimate,
    /// `E[sum V e^{-V}]`, should be 0.
    pub m1: Estimate,
    /// `E[sum V^2 e^{-V}]`.
    pub sigma2: Estimate,
    pub delta_report: Vec<DeltaProbe>,
}

/// Evaluate `m0`, `m1`, `sigma^2` and the integrability probes for `law`.
///
/// `n_samples` and `seed` are used by `MonteCarlo` only.
pub fn verify_boundary_case(
    law: &EnvironmentLaw,
    method: VerifyMethod,
    n_samples: u64,
    seed: u64,
) -> BoundaryReport {
    match method {
        VerifyMethod::ClosedForm => {
            let ex = Estimate::exact;
            BoundaryReport {
                method,
                m0: ex(law.tilted_moment(1.0, 0)),
                m1: ex(law.tilted_moment(1.0, 1)),
                sigma2: ex(law.tilted_moment(1.0, 2)),
                delta_report: DELTA_PROBES
                    .iter()
                    .map(|&d| DeltaProbe {
                        delta: d,
                        neg_tilt: ex(law.tilted_moment(1.0 + d, 0)),
                        pos_tilt: ex(law.tilted_moment(-d, 0)),
                        count_moment: ex(law.offspring_power_moment(1.0 + d)),
                    })
                    .collect(),
            }
        }
        VerifyMethod::Quadrature => {
            let q = |f: &dyn Fn(f64) -> f64| Estimate::exact(quadrature(law, f));
            BoundaryReport {
                method,
                m0: q(&|v| (-v).exp()),
                m1: q(&|v| v * (-v).exp()),
                sigma2: q(&|v| v * v * (-v).exp()),
                delta_report: DELTA_PROBES
                    .iter()
                    .map(|&d| DeltaProbe {
                        delta: d,
                        neg_tilt: q(&|v| (-(1.0 + d) * v).exp()),
                        pos_tilt: q(&|v| (d * v).exp()),
                        count_moment: Estimate::exact(law.offspring_power_moment(1.0 + d)),
                    })
                    .collect(),
            }
        }
        VerifyMethod::MonteCarlo => monte_carlo(law, n_samples.max(1), seed),
    }
}

/// `E[sum_{|x|=1} f(V(x))]` by enumeration (two-point) or trapezoidal
/// integration against the Gaussian density.
fn quadrature(law: &EnvironmentLaw, f: &dyn Fn(f64) -> f64) -> f64 {
    match *law {
        EnvironmentLaw::TwoPoint { jump, p_up } => 2.0 * (p_up * f(jump) + (1.0 - p_up) * f(-jump)),
        EnvironmentLaw::FixedGaussian { mean, variance, .. }
        | EnvironmentLaw::PoissonGaussian { mean, variance, .. } => {
            let s = variance.sqrt();
            const HALF_WIDTH: f64 = 40.0;
            const STEPS: usize = 160_000;
            let h = 2.0 * HALF_WIDTH / STEPS as f64;
            let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
            let mut acc = 0.0;
            for i in 0..=STEPS {
                let z = -HALF_WIDTH + i as f64 * h;
                let w = if i == 0 || i == STEPS { 0.5 } else { 1.0 };
                acc += w * f(mean + s * z) * (-0.5 * z * z).exp();
            }
            law.offspring_mean() * acc * h * norm
        }
    }
}

fn monte_carlo(law: &EnvironmentLaw, n: u64, seed: u64) -> BoundaryReport {
    let mut stream = rng::stream(&[seed, purpose::VERIFY]);
    let mut m0 = RunningStats::new();
    let mut m1 = RunningStats::new();
    let mut s2 = RunningStats::new();
    let mut probes = vec![[RunningStats::new(); 3]; DELTA_PROBES.len()];
    let mut kids = Vec::new();
    for _ in 0..n {
        law.sample_children(&mut stream, &mut kids);
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for &v in &kids {
            let w = (-v).exp();
            a += w;
            b += v * w;
            c += v * v * w;
        }
        m0.push(a);
        m1.push(b);
        s2.push(c);
        for (slot, &d) in probes.iter_mut().zip(DELTA_PROBES.iter()) {
            slot[0].push(kids.iter().map(|v| (-(1.0 + d) * v).exp()).sum());
            slot[1].push(kids.iter().map(|v| (d * v).exp()).sum());
            slot[2].push((kids.len() as f64).powf(1.0 + d));
        }
    }
    let k = EstimatorKind::DirectMonteCarlo;
    BoundaryReport {
        method: VerifyMethod::MonteCarlo,
        m0: m0.estimate(k),
        m1: m1.estimate(k),
        sigma2: s2.estimate(k),
        delta_report: probes
            .iter()
            .zip(DELTA_PROBES.iter())
            .map(|(s, &d)| DeltaProbe {
                delta: d,
                neg_tilt: s[0].estimate(k),
                pos_tilt: s[1].estimate(k),
                count_moment: s[2].estimate(k),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laws() -> Vec<EnvironmentLaw> {
        vec![
            EnvironmentLaw::two_point(),
            EnvironmentLaw::fixed_gaussian(2).unwrap(),
            EnvironmentLaw::fixed_gaussian(3).unwrap(),
            EnvironmentLaw::fixed_gaussian(5).unwrap(),
            EnvironmentLaw::poisson_gaussian(2.0).unwrap(),
        ]
    }

    #[test]
    fn closed_form_is_exact() {
        for law in laws() {
            let r = verify_boundary_case(&law, VerifyMethod::ClosedForm, 0, 0);
            assert!((r.m0.value - 1.0).abs() < 1e-12, "{law:?}");
            assert!(r.m1.value.abs() < 1e-12, "{law:?}");
            assert!((r.sigma2.value - law.sigma2()).abs() < 1e-12);
            assert!(r.delta_report.iter().all(DeltaProbe::is_finite));
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for law in laws() {
            let c = verify_boundary_case(&law, VerifyMethod::ClosedForm, 0, 0);
            let q = verify_boundary_case(&law, VerifyMethod::Quadrature, 0, 0);
            assert!((q.m0.value - 1.0).abs() < 1e-10);
            assert!(q.m1.value.abs() < 1e-10);
            assert!((q.sigma2.value - c.sigma2.value).abs() < 1e-9);
            for (a, b) in q.delta_report.iter().zip(&c.delta_report) {
                assert!((a.neg_tilt.value - b.neg_tilt.value).abs() < 1e-9 * b.neg_tilt.value);
                assert!((a.pos_tilt.value - b.pos_tilt.value).abs() < 1e-9 * b.pos_tilt.value);
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_within_four_se() {
        for law in laws() {
            let r = verify_boundary_case(&law, VerifyMethod::MonteCarlo, 100_000, 11);
            assert!(r.m0.within(1.0, 4.0), "{law:?} m0 {:?}", r.m0);
            assert!(r.m1.within(0.0, 4.0), "{law:?} m1 {:?}", r.m1);
            assert!(
                r.sigma2.within(law.sigma2(), 4.0),
                "{law:?} s2 {:?}",
                r.sigma2
            );
        }
    }
}
