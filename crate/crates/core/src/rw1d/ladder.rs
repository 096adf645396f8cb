//! Ladder heights and overshoots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::estimate::{quantile, Estimate, EstimatorKind, RunningStats};
use crate::rng::{self, purpose};
use crate::{Error, Result};

use super::step::StepLaw1D;

const TAG_LADDER: u64 = 4;
const TAG_OVERSHOOT: u64 = 5;

/// Overshoot summary at one level `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OvershootSummary {
    pub b: f64,
    /// `S_{H_b} - b`.
    pub excess: Estimate,
    pub excess_median: f64,
    pub excess_q90: f64,
    /// `S_{H_b} - S_{H_b - 1}`.
    pub jump: Estimate,
    pub discards: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderStats {
    /// `E[S_{tau_1}]` with `tau_1 = inf{n >= 1: S_n > 0}`.
    pub height: Estimate,
    pub height_discards: u64,
    pub overshoots: Vec<OvershootSummary>,
}

/// Mean first strict ladder height. Runs longer than `step_cap` are dropped
/// and counted.
pub fn ladder_height(law: &StepLaw1D, samples: u64, seed: u64, step_cap: u64) -> (Estimate, u64) {
    let mut st = RunningStats::new();
    let mut discards = 0;
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::RW1D, TAG_LADDER, i]);
        let mut s = 0.0;
        let mut n = 0;
        loop {
            s += law.sample(&mut rg);
            n += 1;
            if s > 0.0 {
                st.push(s);
                break;
            }
            if n == step_cap {
                discards += 1;
                break;
            }
        }
    }
    (st.estimate(EstimatorKind::DirectMonteCarlo), discards)
}

/// Ladder height plus first-passage overshoots on `b_grid`, one walk per
/// sample run to the largest level.
pub fn ladder_stats(
    law: &StepLaw1D,
    samples: u64,
    seed: u64,
    b_grid: &[f64],
    step_cap: u64,
) -> Result<LadderStats> {
    if b_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(Error::Usage("overshoot levels must be positive".into()));
    }
    let (height, height_discards) = ladder_height(law, samples, seed, step_cap);
    let mut order: Vec<usize> = (0..b_grid.len()).collect();
    order.sort_by(|&i, &j| b_grid[i].total_cmp(&b_grid[j]));
    let k = b_grid.len();
    let mut excess: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut jump: Vec<RunningStats> = vec![RunningStats::new(); k];
    let mut discards = vec![0u64; k];
    for i in 0..samples {
        let mut rg = rng::stream(&[seed, purpose::RW1D, TAG_OVERSHOOT, i]);
        let mut s = 0.0;
        let mut n = 0u64;
        let mut next = 0;
        while next < k && n < step_cap {
            let prev = s;
            s += law.sample(&mut rg);
            n += 1;
            while next < k && s >= b_grid[order[next]] {
                let g = order[next];
                excess[g].push(s - b_grid[g]);
                jump[g].push(s - prev);
                next += 1;
            }
        }
        for &g in &order[next..] {
            discards[g] += 1;
        }
    }
    let overshoots = (0..k)
        .map(|g| {
            let mut st = RunningStats::new();
            excess[g].iter().for_each(|&x| st.push(x));
            OvershootSummary {
                b: b_grid[g],
                excess: st.estimate(EstimatorKind::DirectMonteCarlo),
                excess_median: quantile(&excess[g], 0.5),
                excess_q90: quantile(&excess[g], 0.9),
                jump: jump[g].estimate(EstimatorKind::DirectMonteCarlo),
                discards: discards[g],
            }
        })
        .collect();
    Ok(LadderStats {
        height,
        height_discards,
        overshoots,
    })
}

/// One frozen reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fixture {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Location of the reference fixtures shipped with the crate.
pub fn fixtures_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference.txt")
}

/// Parse `name, value, stderr, samples, seed` lines; `#` starts a comment.
pub fn read_fixtures(path: &Path) -> Result<Vec<Fixture>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || {
            Error::Config(format!(
                "{}:{}: expected name, value, stderr, samples, seed",
                path.display(),
                no + 1
            ))
        };
        if f.len() != 5 {
            return Err(bad());
        }
        out.push(Fixture {
            name: f[0].to_string(),
            value: f[1].parse().map_err(|_| bad())?,
            stderr: f[2].parse().map_err(|_| bad())?,
            samples: f[3].parse().map_err(|_| bad())?,
            seed: f[4].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

pub fn write_fixtures(path: &Path, fixtures: &[Fixture]) -> Result<()> {
    let mut text = String::from("# name, value, stderr, samples, seed\n");
    for f in fixtures {
        let _ = writeln!(
            text,
            "{}, {:.17e}, {:.6e}, {}, {}",
            f.name, f.value, f.stderr, f.samples, f.seed
        );
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn find_fixture<'a>(fixtures: &'a [Fixture], name: &str) -> Option<&'a Fixture> {
    fixtures.iter().find(|f| f.name == name)
}

/// Name of the standard Gaussian ladder-height reference.
pub const GAUSSIAN_LADDER: &str = "gaussian_ladder_height";
/// Step cap used for the reference and for comparisons against it.
pub const REFERENCE_STEP_CAP: u64 = 10_000_000;

/// Recompute the reference values.
pub fn compute_reference_fixtures(samples: u64, seed: u64) -> Vec<Fixture> {
    let law = StepLaw1D::Gaussian { sigma: 1.0 };
    let (h, _) = ladder_height(&law, samples, seed, REFERENCE_STEP_CAP);
    vec![Fixture {
        name: GAUSSIAN_LADDER.into(),
        value: h.value,
        stderr: h.stderr,
        samples: h.samples,
        seed,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_ladder_height_is_one() {
        let (h, d) = ladder_height(&StepLaw1D::SimpleLattice, 10_000, 1, 1_000_000);
        assert_eq!(h.value, 1.0);
        assert_eq!(h.stderr, 0.0);
        assert!(d < 30);
        let st = ladder_stats(&StepLaw1D::SimpleLattice, 2_000, 1, &[3.0, 1.0], 1_000_000).unwrap();
        for o in &st.overshoots {
            assert_eq!(o.excess.value, 0.0);
            assert_eq!(o.jump.value, 1.0);
        }
    }

    #[test]
    fn gaussian_ladder_height_matches_reference() {
        let law = StepLaw1D::gaussian(1.0).unwrap();
        let (h, d) = ladder_height(&law, 100_000, 2, 100_000);
        assert!(d < 500);
        // symmetric continuous steps: E[S_{tau_1}] = sigma / sqrt(2)
        assert!(h.within(std::f64::consts::FRAC_1_SQRT_2, 4.0), "{h:?}");
        let fx = read_fixtures(&fixtures_path()).unwrap();
        let r = find_fixture(&fx, GAUSSIAN_LADDER).unwrap();
        let frozen = Estimate {
            value: r.value,
            stderr: r.stderr,
            samples: r.samples,
            kind: EstimatorKind::DirectMonteCarlo,
        };
        assert!(h.z_between(&frozen) < 4.0, "{h:?} vs {r:?}");
    }

    #[test]
    fn fixtures_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        let fx = vec![Fixture {
            name: "x".into(),
            value: 0.1,
            stderr: 1e-3,
            samples: 7,
            seed: 3,
        }];
        write_fixtures(&p, &fx).unwrap();
        assert_eq!(read_fixtures(&p).unwrap(), fx);
        std::fs::write(&p, "a, b\n").unwrap();
        assert!(read_fixtures(&p).is_err());
    }

    #[test]
    fn gaussian_overshoot_is_stationary() {
        let law = StepLaw1D::gaussian(1.0).unwrap();
        let st = ladder_stats(&law, 5_000, 3, &[5.0, 10.0, 20.0], 100_000).unwrap();
        let means: Vec<f64> = st.overshoots.iter().map(|o| o.excess.value).collect();
        let max = means.iter().cloned().fold(f64::MIN, f64::max);
        let min = means.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 1.2, "{means:?}");
        assert!(st
            .overshoots
            .iter()
            .all(|o| o.excess_median <= o.excess_q90));
    }
}
