use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric family of the offspring/displacement law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `b` children, i.i.d. `N(mu, s^2)` displacements.
    FixedGaussian,
    /// Two children, each independently `+a` with probability `p`, else `-a`.
    TwoPoint,
    /// `Poisson(lambda)` children, i.i.d. `N(mu, s^2)` displacements.
    PoissonGaussian,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::FixedGaussian => "fixed-gaussian",
            Family::TwoPoint => "two-point",
            Family::PoissonGaussian => "poisson-gaussian",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "fixed-gaussian" | "fixedgaussian" | "gaussian" => Ok(Family::FixedGaussian),
            "two-point" | "twopoint" => Ok(Family::TwoPoint),
            "poisson-gaussian" | "poissongaussian" => Ok(Family::PoissonGaussian),
            other => Err(Error::Config(format!("unknown law family `{other}`"))),
        }
    }
}

/// Free parameters accepted by [`make_law`]. Unused fields are ignored by a family.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LawParams {
    /// Number of children for `FixedGaussian`.
    pub branching: Option<u32>,
    /// Offspring mean for `PoissonGaussian`.
    pub offspring_mean: Option<f64>,
    /// Optional displacement variance; checked against the boundary-case solution.
    pub variance: Option<f64>,
}

/// Joint law of the number of children and their displacements, solved so that
/// `E[sum e^{-V}] = 1` and `E[sum V e^{-V}] = 0` hold analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvironmentLaw {
    FixedGaussian {
        branching: u32,
        mean: f64,
        variance: f64,
    },
    TwoPoint {
        jump: f64,
        p_up: f64,
    },
    PoissonGaussian {
        offspring_mean: f64,
        mean: f64,
        variance: f64,
    },
}

/// Build a boundary-case law in `family`.
///
/// For Gaussian displacements `E[e^{-V}] = e^{-mu + s^2/2}` and
/// `E[V e^{-V}] = (mu - s^2) e^{-mu + s^2/2}`, so the boundary case forces
/// `mu = s^2 = 2 ln m` where `m` is the offspring mean. For the two-point law
/// it forces `cosh a = 2` and `p = e^a / 4`.
pub fn make_law(family: Family, params: &LawParams) -> Result<EnvironmentLaw> {
    let law = match family {
        Family::FixedGaussian => {
            let b = params
                .branching
                .ok_or_else(|| Error::Construction("fixed-gaussian needs branching b".into()))?;
            if b < 2 {
                return Err(Error::Construction(format!(
                    "not supercritical: fixed-gaussian with b = {b} has mean offspring {b} <= 1"
                )));
            }
            let s2 = 2.0 * (b as f64).ln();
            EnvironmentLaw::FixedGaussian {
                branching: b,
                mean: s2,
                variance: s2,
            }
        }
        Family::TwoPoint => {
            let a = (2.0 + 3.0f64.sqrt()).ln();
            EnvironmentLaw::TwoPoint {
                jump: a,
                p_up: (2.0 + 3.0f64.sqrt()) / 4.0,
            }
        }
        Family::PoissonGaussian => {
            let m = params.offspring_mean.ok_or_else(|| {
                Error::Construction("poisson-gaussian needs offspring mean lambda".into())
            })?;
            if !(m.is_finite() && m > 1.0) {
                return Err(Error::Construction(format!(
                    "not supercritical: poisson-gaussian offspring mean {m} <= 1"
                )));
            }
            let s2 = 2.0 * m.ln();
            EnvironmentLaw::PoissonGaussian {
                offspring_mean: m,
                mean: s2,
                variance: s2,
            }
        }
    };
    if let Some(v) = params.variance {
        let solved = law.displacement_variance();
        if (v - solved).abs() > 1e-9 * solved.max(1.0) {
            return Err(Error::Construction(format!(
                "variance s2 = {v} violates the boundary case; {} requires s2 = {solved}",
                family
            )));
        }
    }
    Ok(law)
}

impl EnvironmentLaw {
    pub fn two_point() -> Self {
        make_law(Family::TwoPoint, &LawParams::default()).expect("two-point is always feasible")
    }

    pub fn fixed_gaussian(b: u32) -> Result<Self> {
        make_law(
            Family::FixedGaussian,
            &LawParams {
                branching: Some(b),
                ..Default::default()
            },
        )
    }

    pub fn poisson_gaussian(offspring_mean: f64) -> Result<Self> {
        make_law(
            Family::PoissonGaussian,
            &LawParams {
                offspring_mean: Some(offspring_mean),
                ..Default::default()
            },
        )
    }

    pub fn family(&self) -> Family {
        match self {
            EnvironmentLaw::FixedGaussian { .. } => Family::FixedGaussian,
            EnvironmentLaw::TwoPoint { .. } => Family::TwoPoint,
            EnvironmentLaw::PoissonGaussian { .. } => Family::PoissonGaussian,
        }
    }

    pub fn offspring_mean(&self) -> f64 {
        match *self {
            EnvironmentLaw::FixedGaussian { branching, .. } => branching as f64,
            EnvironmentLaw::TwoPoint { .. } => 2.0,
            EnvironmentLaw::PoissonGaussian { offspring_mean, .. } => offspring_mean,
        }
    }

    /// Variance of a single displacement under the base law.
    pub fn displacement_variance(&self) -> f64 {
        match *self {
            EnvironmentLaw::FixedGaussian { variance, .. }
            | EnvironmentLaw::PoissonGaussian { variance, .. } => variance,
            EnvironmentLaw::TwoPoint { jump, p_up } => {
                let m = jump * (2.0 * p_up - 1.0);
                jump * jump - m * m
            }
        }
    }

    /// Closed-form `sigma^2 = E[sum V^2 e^{-V}]`.
    pub fn sigma2(&self) -> f64 {
        match *self {
            EnvironmentLaw::FixedGaussian { variance, .. }
            | EnvironmentLaw::PoissonGaussian { variance, .. } => variance,
            EnvironmentLaw::TwoPoint { jump, .. } => jump * jump,
        }
    }

    /// Closed form of `E[sum_{|x|=1} V(x)^k e^{-t V(x)}]` for `k` in `0..=2`.
    pub fn tilted_moment(&self, t: f64, k: u32) -> f64 {
        match *self {
            EnvironmentLaw::TwoPoint { jump, p_up } => {
                let up = jump.powi(k as i32) * (-t * jump).exp();
                let down = (-jump).powi(k as i32) * (t * jump).exp();
                2.0 * (p_up * up + (1.0 - p_up) * down)
            }
            EnvironmentLaw::FixedGaussian { mean, variance, .. }
            | EnvironmentLaw::PoissonGaussian { mean, variance, .. } => {
                // Under the tilt e^{-tV}, V ~ N(mean - t s^2, s^2) with mass e^{-t mean + t^2 s^2 / 2}.
                let mass = (-t * mean + 0.5 * t * t * variance).exp();
                let shifted = mean - t * variance;
                let poly = match k {
                    0 => 1.0,
                    1 => shifted,
                    2 => shifted * shifted + variance,
                    _ => panic!("tilted_moment supports k <= 2"),
                };
                self.offspring_mean() * mass * poly
            }
        }
    }

    /// Closed form of `E[N^q]` for the offspring count `N` (series for Poisson).
    pub fn offspring_power_moment(&self, q: f64) -> f64 {
        match *self {
            EnvironmentLaw::FixedGaussian { branching, .. } => (branching as f64).powf(q),
            EnvironmentLaw::TwoPoint { .. } => 2.0f64.powf(q),
            EnvironmentLaw::PoissonGaussian { offspring_mean, .. } => {
                poisson_series(offspring_mean, |k| (k as f64).powf(q))
            }
        }
    }

    /// Sample one family of children; writes displacements into `out` (cleared first).
    pub fn sample_children<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        match *self {
            EnvironmentLaw::FixedGaussian {
                branching,
                mean,
                variance,
            } => {
                let normal = Normal::new(mean, variance.sqrt()).expect("valid normal");
                out.extend((0..branching).map(|_| normal.sample(rng)));
            }
            EnvironmentLaw::TwoPoint { jump, p_up } => {
                for _ in 0..2 {
                    let up = rng.random::<f64>() < p_up;
                    out.push(if up { jump } else { -jump });
                }
            }
            EnvironmentLaw::PoissonGaussian {
                offspring_mean,
                mean,
                variance,
            } => {
                let n = Poisson::new(offspring_mean)
                    .expect("valid poisson")
                    .sample(rng) as usize;
                let normal = Normal::new(mean, variance.sqrt()).expect("valid normal");
                out.extend((0..n).map(|_| normal.sample(rng)));
            }
        }
    }

    /// Flat key-value representation.
    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("family".to_string(), self.family().to_string());
        match *self {
            EnvironmentLaw::FixedGaussian {
                branching,
                variance,
                ..
            } => {
                m.insert("b".into(), branching.to_string());
                m.insert("s2".into(), format!("{variance:?}"));
            }
            EnvironmentLaw::TwoPoint { .. } => {}
            EnvironmentLaw::PoissonGaussian {
                offspring_mean,
                variance,
                ..
            } => {
                m.insert("lambda".into(), format!("{offspring_mean:?}"));
                m.insert("s2".into(), format!("{variance:?}"));
            }
        }
        m
    }

    /// Inverse of [`EnvironmentLaw::to_kv`]; unknown keys are ignored.
    pub fn from_kv(kv: &BTreeMap<String, String>) -> Result<Self> {
        let family: Family = kv
            .get("family")
            .ok_or_else(|| Error::Config("missing key `family`".into()))?
            .parse()?;
        let parse_f = |k: &str| -> Result<Option<f64>> {
            kv.get(k)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("key `{k}`: bad number `{v}`")))
                })
                .transpose()
        };
        let branching = kv
            .get("b")
            .map(|v| {
                v.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Config(format!("key `b`: bad integer `{v}`")))
            })
            .transpose()?;
        make_law(
            family,
            &LawParams {
                branching,
                offspring_mean: parse_f("lambda")?,
                variance: parse_f("s2")?,
            },
        )
    }
}

fn poisson_series(lambda: f64, f: impl Fn(u64) -> f64) -> f64 {
    let mut pk = (-lambda).exp();
    let mut total = 0.0;
    let mut k = 0u64;
    loop {
        total += pk * f(k);
        k += 1;
        pk *= lambda / k as f64;
        if k as f64 > lambda && pk * f(k).max(1.0) < 1e-20 {
            break;
        }
    }
    total
}
