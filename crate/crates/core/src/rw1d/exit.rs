//! Two-sided exit of a centered walk.

use num::rational::BigRational;
use num::traits::{Num, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::estimate::{Estimate, EstimatorKind, RunningStats};
use crate::rng::{self, purpose};
use crate::{Error, Result};

use super::step::StepLaw1D;

const TAG_EXIT: u64 = 1;
const TAG_IDENTITY: u64 = 2;

/// Monte Carlo estimate of `P{H_a < H_{-b}}`, with the gambler's-ruin value
/// when the walk is the simple lattice walk and `a`, `b` are integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitEstimate {
    pub a: f64,
    pub b: f64,
    pub estimate: Estimate,
    pub exact: Option<f64>,
}

fn check_levels(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Usage(format!(
            "exit levels need a, b >= 0 and a + b > 0, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// Run one walk from 0 until `S >= a` (returns the exit value and true) or
/// `S <= -b` (false).
fn exit_once<R: rand::Rng + ?Sized>(law: &StepLaw1D, rng: &mut R, a: f64, b: f64) -> (f64, bool) {
    let mut s = 0.0;
    loop {
        if s >= a {
            return (s, true);
        }
        if s <= -b {
            return (s, false);
        }
        s += law.sample(rng);
    }
}

/// `P{H_a < H_{-b}}` where `H_a = inf{n: S_n >= a}` and `H_{-b} = inf{n: S_n <= -b}`.
pub fn exit_prob(law: &StepLaw1D, a: f64, b: f64, samples: u64, seed: u64) -> Result<ExitEstimate> {
    check_levels(a, b)?;
    let mut st = RunningStats::new();
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::RW1D, TAG_EXIT, i]);
        let (_, up) = exit_once(law, &mut rg, a, b);
        st.push(if up { 1.0 } else { 0.0 });
    }
    let lattice = law.is_lattice() && a.fract() == 0.0 && b.fract() == 0.0;
    Ok(ExitEstimate {
        a,
        b,
        estimate: st.estimate(EstimatorKind::DirectMonteCarlo),
        exact: lattice.then(|| lattice_exit_prob(a as u64, b as u64)),
    })
}

/// Exact exit probability of the simple lattice walk, by solving the
/// tridiagonal system `h(k) = (h(k-1) + h(k+1)) / 2` on `-b < k < a` with
/// `h(a) = 1`, `h(-b) = 0` in rational arithmetic.
pub fn lattice_exit_ratio(a: u64, b: u64) -> BigRational {
    if a == 0 {
        return BigRational::one();
    }
    if b == 0 {
        return BigRational::zero();
    }
    // interior sites k = -b+1 .. a-1, written as 0 .. n-1
    let n = (a + b - 1) as usize;
    let mut rhs = vec![BigRational::zero(); n];
    rhs[n - 1] = BigRational::new(1.into(), 2.into());
    solve_symmetric_walk(&mut rhs);
    rhs[(b - 1) as usize].clone()
}

/// [`lattice_exit_ratio`] rounded to the nearest double.
pub fn lattice_exit_prob(a: u64, b: u64) -> f64 {
    lattice_exit_ratio(a, b).to_f64().unwrap_or(f64::NAN)
}

/// Solve `h_i - (h_{i-1} + h_{i+1}) / 2 = rhs_i` on `0..n` with `h_{-1} = h_n = 0`,
/// in place (Thomas algorithm; `g` holds the negated superdiagonal factors).
pub(super) fn solve_symmetric_walk<T: Clone + Num>(rhs: &mut [T]) {
    let n = rhs.len();
    let half = T::one() / (T::one() + T::one());
    let mut g: Vec<T> = Vec::with_capacity(n);
    g.push(half.clone());
    for i in 1..n {
        let denom = T::one() - half.clone() * g[i - 1].clone();
        g.push(half.clone() / denom.clone());
        rhs[i] = (rhs[i].clone() + half.clone() * rhs[i - 1].clone()) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        rhs[i] = rhs[i].clone() + g[i].clone() * rhs[i + 1].clone();
    }
}

/// Sweep `(a + b) P - b` over a grid of exit levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitSweep {
    pub cells: Vec<ExitEstimate>,
    /// `sup |(a + b) P - b|` over the grid.
    pub band: f64,
    /// Largest `(a + b)` times the standard error over the grid.
    pub band_stderr: f64,
}

pub fn exit_sweep(
    law: &StepLaw1D,
    levels: &[(f64, f64)],
    samples: u64,
    seed: u64,
) -> Result<ExitSweep> {
    let mut cells = Vec::with_capacity(levels.len());
    let mut band: f64 = 0.0;
    let mut band_stderr: f64 = 0.0;
    for (k, &(a, b)) in levels.iter().enumerate() {
        let cell = exit_prob(law, a, b, samples, rng::child_key(seed, k as u64))?;
        band = band.max(((a + b) * cell.estimate.value - b).abs());
        band_stderr = band_stderr.max((a + b) * cell.estimate.stderr);
        cells.push(cell);
    }
    Ok(ExitSweep {
        cells,
        band,
        band_stderr,
    })
}

/// Both sides of `b P{H_{-b} < H_a} -> E[S_{H_a}]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitIdentity {
    pub a: f64,
    /// `E[S_{H_a}]` from independent first-passage runs.
    pub ladder_mean: Estimate,
    /// `(b, b P{H_{-b} < H_a})` per level.
    pub scaled: Vec<(f64, Estimate)>,
}

/// Estimate both sides of the exit identity. First-passage runs above `a` that
/// exceed `step_cap` steps are dropped and counted in `discards`.
pub fn exit_identity(
    law: &StepLaw1D,
    a: f64,
    bs: &[f64],
    samples: u64,
    seed: u64,
    step_cap: u64,
) -> Result<(ExitIdentity, u64)> {
    if !(a > 0.0) {
        return Err(Error::Usage(format!("exit identity needs a > 0, got {a}")));
    }
    let mut overshoot = RunningStats::new();
    let mut discards = 0;
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::RW1D, TAG_IDENTITY, i]);
        let mut s = 0.0;
        let mut n = 0;
        while s < a && n < step_cap {
            s += law.sample(&mut rg);
            n += 1;
        }
        if s >= a {
            overshoot.push(s);
        } else {
            discards += 1;
        }
    }
    let mut scaled = Vec::with_capacity(bs.len());
    for (k, &b) in bs.iter().enumerate() {
        let e = exit_prob(law, a, b, samples, rng::child_key(seed, k as u64 + 1))?;
        let down = e.estimate;
        scaled.push((
            b,
            Estimate {
                value: b * (1.0 - down.value),
                stderr: b * down.stderr,
                samples: down.samples,
                kind: down.kind,
            },
        ));
    }
    Ok((
        ExitIdentity {
            a,
            ladder_mean: overshoot.estimate(EstimatorKind::DirectMonteCarlo),
            scaled,
        },
        discards,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamblers_ruin_closed_form() {
        for a in 1..=20u64 {
            for b in 1..=20u64 {
                let r = lattice_exit_ratio(a, b);
                assert_eq!(r, BigRational::new(b.into(), (a + b).into()));
                assert_eq!(lattice_exit_prob(a, b), b as f64 / (a + b) as f64);
            }
        }
        assert_eq!(lattice_exit_prob(5, 5), 0.5);
        assert_eq!(lattice_exit_prob(3, 7), 0.7);
        assert_eq!(lattice_exit_prob(0, 3), 1.0);
        assert_eq!(lattice_exit_prob(3, 0), 0.0);
    }

    #[test]
    fn lattice_monte_carlo_agrees() {
        let law = StepLaw1D::SimpleLattice;
        for (a, b) in [(3.0, 7.0), (5.0, 5.0), (1.0, 20.0)] {
            let e = exit_prob(&law, a, b, 40_000, 1).unwrap();
            let exact = e.exact.unwrap();
            assert!(e.estimate.within(exact, 4.0), "{e:?}");
        }
        assert!(exit_prob(&law, 0.0, 0.0, 1, 1).is_err());
        assert!(
            exit_prob(&StepLaw1D::gaussian(1.0).unwrap(), 1.0, 2.0, 10, 1)
                .unwrap()
                .exact
                .is_none()
        );
    }

    #[test]
    fn gaussian_band_is_finite() {
        let law = StepLaw1D::gaussian(1.0).unwrap();
        let levels: Vec<(f64, f64)> = [1.0, 5.0, 10.0]
            .iter()
            .flat_map(|&a| [1.0, 5.0, 10.0].map(|b| (a, b)))
            .collect();
        let sweep = exit_sweep(&law, &levels, 4_000, 2).unwrap();
        // overshoot of a unit Gaussian walk is O(1)
        assert!(sweep.band.is_finite() && sweep.band < 3.0, "{}", sweep.band);
    }

    #[test]
    fn exit_identity_tracks_mean_first_passage_value() {
        let law = StepLaw1D::gaussian(1.0).unwrap();
        let (id, discards) = exit_identity(&law, 1.0, &[100.0], 20_000, 3, 1_000_000).unwrap();
        assert!(discards < 100);
        let (_, scaled) = id.scaled[0];
        assert!(scaled.z_between(&id.ladder_mean) < 4.0, "{id:?}");
    }
}
