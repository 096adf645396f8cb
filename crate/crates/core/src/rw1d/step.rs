//! Centered step laws on the line.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::environment::EnvironmentLaw;
use crate::{Error, Result};

/// Law of one step of a centered random walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepLaw1D {
    /// `+1` or `-1` with probability 1/2 each.
    SimpleLattice,
    /// `N(0, sigma^2)`.
    Gaussian { sigma: f64 },
    /// Spine increment of a branching law under the size-biased measure.
    Spine(EnvironmentLaw),
}

impl StepLaw1D {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Construction(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(StepLaw1D::Gaussian { sigma })
    }

    /// Step variance.
    pub fn variance(&self) -> f64 {
        match self {
            StepLaw1D::SimpleLattice => 1.0,
            StepLaw1D::Gaussian { sigma } => sigma * sigma,
            StepLaw1D::Spine(law) => law.sigma2(),
        }
    }

    /// True for the `+-1` walk, where levels are hit without overshoot.
    pub fn is_lattice(&self) -> bool {
        matches!(self, StepLaw1D::SimpleLattice)
    }

    pub fn name(&self) -> String {
        match self {
            StepLaw1D::SimpleLattice => "simple-lattice".into(),
            StepLaw1D::Gaussian { sigma } => format!("gaussian({sigma})"),
            StepLaw1D::Spine(law) => format!("spine({})", law.family().as_str()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            StepLaw1D::SimpleLattice => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            StepLaw1D::Gaussian { sigma } => {
                sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
            }
            StepLaw1D::Spine(law) => match law {
                // size-biasing the two-point law makes both signs equally likely
                EnvironmentLaw::TwoPoint { jump, .. } => {
                    if rng.random::<bool>() {
                        jump
                    } else {
                        -jump
                    }
                }
                EnvironmentLaw::FixedGaussian { variance, .. }
                | EnvironmentLaw::PoissonGaussian { variance, .. } => {
                    variance.sqrt()
                        * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::{EstimatorKind, RunningStats};
    use crate::rng;
    use crate::spine::two_point_step_law;

    #[test]
    fn steps_are_centered_with_declared_variance() {
        let laws = [
            StepLaw1D::SimpleLattice,
            StepLaw1D::gaussian(1.5).unwrap(),
            StepLaw1D::Spine(EnvironmentLaw::two_point()),
            StepLaw1D::Spine(EnvironmentLaw::fixed_gaussian(3).unwrap()),
        ];
        for (i, law) in laws.iter().enumerate() {
            let mut rg = rng::stream(&[i as u64]);
            let mut m1 = RunningStats::new();
            let mut m2 = RunningStats::new();
            for _ in 0..200_000 {
                let x = law.sample(&mut rg);
                m1.push(x);
                m2.push(x * x);
            }
            assert!(m1
                .estimate(EstimatorKind::DirectMonteCarlo)
                .within(0.0, 4.0));
            let e2 = m2.estimate(EstimatorKind::DirectMonteCarlo);
            let v = law.variance();
            assert!(
                (e2.value - v).abs() < 1e-10 * v || e2.within(v, 4.0),
                "{law:?} {e2:?}"
            );
        }
    }

    #[test]
    fn two_point_spine_marginal_is_symmetric() {
        let q = two_point_step_law(&EnvironmentLaw::two_point()).unwrap();
        let up: f64 = q.iter().filter(|t| t.0 > 0.0).map(|t| t.2).sum();
        assert!((up - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_gaussian() {
        assert!(StepLaw1D::gaussian(0.0).is_err());
    }
}
