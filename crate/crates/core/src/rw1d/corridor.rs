//! Staying in a drawdown corridor until first passage.

use num::rational::BigRational;
use num::traits::Num;
use serde::Serialize;

use crate::estimate::{Estimate, EstimatorKind, RunningStats};
use crate::rng::{self, purpose};
use crate::{Error, Result};

use super::exit::solve_symmetric_walk;
use super::step::StepLaw1D;

const TAG_CORRIDOR: u64 = 3;

/// Default bound on `(levels) x (drawdown states)` for the lattice program.
pub const DP_STATE_BUDGET: u64 = 100_000_000;

/// Whether the walk must also stay at or above 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CorridorMode {
    WithFloor,
    NoFloor,
}

impl CorridorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorridorMode::WithFloor => "with_floor",
            CorridorMode::NoFloor => "no_floor",
        }
    }
}

/// Event: for every `j <= H_r`, `max_{i<=j} S_i - S_j < lambda` (and `S_j >= 0`
/// with a floor), where `H_r = inf{n: S_n >= r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corridor {
    pub r: f64,
    pub lambda: f64,
    pub mode: CorridorMode,
}

impl Corridor {
    pub fn new(r: f64, lambda: f64, mode: CorridorMode) -> Result<Self> {
        if !(r >= 1.0 && lambda >= 1.0) || !r.is_finite() || !lambda.is_finite() {
            return Err(Error::Usage(format!(
                "corridor needs r >= 1 and lambda >= 1, got ({r}, {lambda})"
            )));
        }
        Ok(Self { r, lambda, mode })
    }

    /// Number of allowed drawdown values on the lattice: `D in 0..ceil(lambda)`.
    fn lattice_width(&self) -> u64 {
        self.lambda.ceil() as u64
    }

    /// Integer level count for the lattice walk.
    fn lattice_levels(&self) -> u64 {
        self.r.ceil() as u64
    }

    /// First drawdown value that fails while the running maximum is `m`.
    fn lattice_fail(&self, m: u64) -> u64 {
        match self.mode {
            CorridorMode::NoFloor => self.lattice_width(),
            CorridorMode::WithFloor => self.lattice_width().min(m + 1),
        }
    }
}

/// Monte Carlo estimate of the corridor probability.
pub fn corridor_mc(law: &StepLaw1D, c: &Corridor, samples: u64, seed: u64) -> Estimate {
    let mut st = RunningStats::new();
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::RW1D, TAG_CORRIDOR, i]);
        let (mut s, mut max) = (0.0f64, 0.0f64);
        let ok = loop {
            if s >= c.r {
                break true;
            }
            s += law.sample(&mut rg);
            max = max.max(s);
            if max - s >= c.lambda || (c.mode == CorridorMode::WithFloor && s < 0.0) {
                break false;
            }
        };
        st.push(if ok { 1.0 } else { 0.0 });
    }
    st.estimate(EstimatorKind::DirectMonteCarlo)
}

/// Exact corridor probability for the simple lattice walk by dynamic
/// programming over (running maximum, drawdown).
///
/// Within one running-maximum level `m` the drawdown `D` performs a symmetric
/// walk on `0..fail(m)`; leaving `D = 0` upwards moves to level `m + 1`. Levels
/// are solved backwards from `r`, each by one tridiagonal solve.
pub fn corridor_dp(c: &Corridor, state_budget: u64) -> Result<f64> {
    check_states(c, state_budget)?;
    Ok(program::<f64>(c))
}

/// [`corridor_dp`] in rational arithmetic.
pub fn corridor_dp_exact(c: &Corridor, state_budget: u64) -> Result<BigRational> {
    check_states(c, state_budget)?;
    Ok(program::<BigRational>(c))
}

fn check_states(c: &Corridor, state_budget: u64) -> Result<()> {
    let states = c.lattice_levels().saturating_mul(c.lattice_width());
    if states > state_budget {
        return Err(Error::Budget(format!(
            "corridor program at (r, lambda) = ({}, {}) needs {states} states, budget {state_budget}",
            c.r, c.lambda
        )));
    }
    Ok(())
}

fn program<T: Clone + Num>(c: &Corridor) -> T {
    let half = T::one() / (T::one() + T::one());
    // success probability from (m + 1, D = 0)
    let mut above = T::one();
    for m in (0..c.lattice_levels()).rev() {
        let fail = c.lattice_fail(m) as usize;
        // h(0) = (above + h(1)) / 2, h(d) = (h(d-1) + h(d+1)) / 2, h(fail) = 0
        let mut rhs = vec![T::zero(); fail];
        rhs[0] = half.clone() * above;
        solve_symmetric_walk(&mut rhs);
        above = rhs.swap_remove(0);
    }
    above
}

/// Closed-form product over ladder levels for the lattice walk.
///
/// At each new maximum the walk either steps up (probability 1/2) or starts a
/// drawdown excursion that returns before reaching the failing drawdown `d`
/// with probability `1 - 1/d`. Each level therefore succeeds with
/// probability `d / (d + 1)`.
pub fn corridor_block_product(c: &Corridor) -> f64 {
    (0..c.lattice_levels())
        .map(|m| {
            let d = c.lattice_fail(m) as f64;
            d / (d + 1.0)
        })
        .product()
}

/// [`corridor_block_product`] in rational arithmetic.
pub fn corridor_block_product_exact(c: &Corridor) -> BigRational {
    (0..c.lattice_levels())
        .map(|m| {
            let d = c.lattice_fail(m);
            BigRational::new(d.into(), (d + 1).into())
        })
        .product()
}

/// Exhaustive enumeration of lattice paths of length at most `max_len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnumerationBracket {
    /// Mass of paths that reach `r` inside the corridor within `max_len` steps.
    pub lower: f64,
    /// `lower` plus the mass of paths still alive after `max_len` steps.
    pub upper: f64,
    pub paths: u64,
}

/// Enumerate every `+-1` path step by step; the true probability lies in
/// `[lower, upper]`.
pub fn corridor_enumerate(
    c: &Corridor,
    max_len: u32,
    path_budget: u64,
) -> Result<EnumerationBracket> {
    let r = c.lattice_levels() as i64;
    let fail_floor = c.mode == CorridorMode::WithFloor;
    let lambda = c.lambda;
    let mut out = EnumerationBracket {
        lower: 0.0,
        upper: 0.0,
        paths: 0,
    };
    // (s, max, length)
    let mut stack = vec![(0i64, 0i64, 0u32)];
    let mut alive = 0.0;
    while let Some((s, max, len)) = stack.pop() {
        out.paths += 1;
        if out.paths > path_budget {
            return Err(Error::Budget(format!(
                "path enumeration exceeded {path_budget} paths"
            )));
        }
        let w = 0.5f64.powi(len as i32);
        if s >= r {
            out.lower += w;
            continue;
        }
        if len == max_len {
            alive += w;
            continue;
        }
        for step in [1i64, -1] {
            let t = s + step;
            let m = max.max(t);
            if ((m - t) as f64) < lambda && !(fail_floor && t < 0) {
                stack.push((t, m, len + 1));
            }
        }
    }
    out.upper = out.lower + alive;
    Ok(out)
}

/// Corridor probability by the chosen method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CorridorMethod {
    Mc,
    LatticeDp,
}

pub fn corridor_prob(
    law: &StepLaw1D,
    c: &Corridor,
    method: CorridorMethod,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    match method {
        CorridorMethod::Mc => Ok(corridor_mc(law, c, samples, seed)),
        CorridorMethod::LatticeDp => {
            if !law.is_lattice() {
                return Err(Error::Usage(
                    "lattice_dp needs the simple lattice walk".into(),
                ));
            }
            Ok(Estimate::exact(corridor_dp(c, DP_STATE_BUDGET)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cor(r: f64, l: f64, mode: CorridorMode) -> Corridor {
        Corridor::new(r, l, mode).unwrap()
    }

    #[test]
    fn dp_matches_block_product() {
        for mode in [CorridorMode::NoFloor, CorridorMode::WithFloor] {
            for r in 1..=40 {
                for l in [1.0, 1.5, 2.0, 3.0, 4.0, 7.3] {
                    let c = cor(r as f64, l, mode);
                    let dp = corridor_dp(&c, DP_STATE_BUDGET).unwrap();
                    let bp = corridor_block_product(&c);
                    assert!(
                        (dp - bp).abs() < 1e-12 * bp.max(1e-300),
                        "{c:?}: {dp} vs {bp}"
                    );
                }
            }
        }
    }

    #[test]
    fn exact_program_equals_block_product() {
        for mode in [CorridorMode::NoFloor, CorridorMode::WithFloor] {
            for r in 1..=10 {
                for l in 1..=4 {
                    let c = cor(r as f64, l as f64, mode);
                    let dp = corridor_dp_exact(&c, DP_STATE_BUDGET).unwrap();
                    assert_eq!(dp, corridor_block_product_exact(&c), "{c:?}");
                }
            }
        }
    }

    #[test]
    fn enumeration_brackets_the_program() {
        for mode in [CorridorMode::NoFloor, CorridorMode::WithFloor] {
            // surviving paths grow like 1.88^n at lambda = 4
            for (r, l, len) in [(3.0, 2.0, 40), (6.0, 3.0, 30), (10.0, 4.0, 24)] {
                let c = cor(r, l, mode);
                let dp = corridor_dp(&c, DP_STATE_BUDGET).unwrap();
                let b = corridor_enumerate(&c, len, 100_000_000).unwrap();
                assert!(
                    b.lower <= dp + 1e-15 && dp <= b.upper + 1e-15,
                    "{c:?} {dp} {b:?}"
                );
            }
        }
        // a width-one corridor admits only the straight path
        let straight = corridor_enumerate(&cor(5.0, 1.0, CorridorMode::NoFloor), 10, 100).unwrap();
        assert_eq!(straight.lower, 1.0 / 32.0);
        assert_eq!(straight.upper, straight.lower);
    }

    #[test]
    fn dp_is_monotone_and_bounded() {
        let mut prev_r = 1.0;
        for r in 1..=60 {
            let p = corridor_dp(
                &cor(r as f64, 5.0, CorridorMode::WithFloor),
                DP_STATE_BUDGET,
            )
            .unwrap();
            assert!((0.0..=1.0).contains(&p) && p <= prev_r);
            prev_r = p;
        }
        let mut prev_l = 0.0;
        for l in 1..=30 {
            let p =
                corridor_dp(&cor(30.0, l as f64, CorridorMode::NoFloor), DP_STATE_BUDGET).unwrap();
            assert!(p >= prev_l);
            prev_l = p;
        }
        // lambda > r without a floor still contains the staircase
        let c = cor(12.0, 13.0, CorridorMode::NoFloor);
        assert!(corridor_dp(&c, DP_STATE_BUDGET).unwrap() >= 0.5f64.powi(12));
    }

    #[test]
    fn dp_matches_monte_carlo() {
        let c = cor(40.0, 6.0, CorridorMode::NoFloor);
        let dp = corridor_dp(&c, DP_STATE_BUDGET).unwrap();
        let mc = corridor_mc(&StepLaw1D::SimpleLattice, &c, 200_000, 4);
        assert!(mc.within(dp, 4.0), "{dp} {mc:?}");
    }

    #[test]
    fn exponent_bracket() {
        for (r, l) in [(100.0, 5.0), (200.0, 7.0), (400.0, 10.0)] {
            for mode in [CorridorMode::NoFloor, CorridorMode::WithFloor] {
                let p = corridor_dp(&cor(r, l, mode), DP_STATE_BUDGET).unwrap();
                let slope = -(l / r) * p.ln();
                assert!((0.6..=1.6).contains(&slope), "{r} {l} {mode:?}: {slope}");
            }
        }
    }

    #[test]
    fn budget_and_usage_errors() {
        let c = cor(1e6, 1e3, CorridorMode::NoFloor);
        assert!(matches!(corridor_dp(&c, 1_000), Err(Error::Budget(_))));
        assert!(Corridor::new(0.5, 2.0, CorridorMode::NoFloor).is_err());
        let g = StepLaw1D::gaussian(1.0).unwrap();
        assert!(corridor_prob(
            &g,
            &cor(5.0, 2.0, CorridorMode::NoFloor),
            CorridorMethod::LatticeDp,
            1,
            1
        )
        .is_err());
    }
}
