//! `theorem-main` and `displacement`: long single-walk runs with checkpoints.

use std::f64::consts::PI;

use super::config::{law_label, ExperimentConfig};
use super::output::{Outcome, Table, Verdict};
use super::{default_workers, replica_pool};
use crate::environment::TreeArena;
use crate::estimate::{ols, quantile};
use crate::rng::{self, purpose};
use crate::walk::{step, WalkState};
use crate::{row, Error, Result};

const RATIO_BAND: (f64, f64) = (0.15, 0.9);

#[derive(Debug, Clone, Copy)]
struct Checkpoint {
    replica: u64,
    n: u64,
    max_v: f64,
    max_depth: u32,
}

impl Checkpoint {
    fn ratio_v(&self) -> f64 {
        self.max_v / (self.n as f64).ln().powi(2)
    }

    fn ratio_depth(&self) -> f64 {
        f64::from(self.max_depth) / (self.n as f64).ln().powi(3)
    }
}

/// One walk per replica, read off at every `n` in `cfg.n_steps`.
fn trajectories(cfg: &ExperimentConfig) -> Result<Vec<Vec<Checkpoint>>> {
    let ns = &cfg.n_steps;
    if ns.is_empty() || ns[0] < 2 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "n_steps must be strictly increasing and at least 2".into(),
        ));
    }
    let last = *ns.last().expect("non-empty");
    if last > cfg.step_cap {
        return Err(Error::Budget(format!(
            "n_steps = {last} exceeds step_cap = {}",
            cfg.step_cap
        )));
    }
    let law = cfg.law();
    let replicas = cfg.replicas.unwrap_or(32);
    replica_pool(replicas, default_workers(), |i| {
        let mut arena = TreeArena::new(law, cfg.seed, i);
        let mut rg = rng::stream(&[cfg.seed, purpose::WALK, i]);
        let mut s = WalkState::at_root();
        let mut out = Vec::with_capacity(ns.len());
        for &n in ns {
            while s.steps < n {
                step(&mut arena, &mut s, &mut rg);
            }
            out.push(Checkpoint {
                replica: i,
                n,
                max_v: s.max_potential,
                max_depth: s.max_depth,
            });
        }
        Ok(out)
    })
}

fn run_table(cfg: &ExperimentConfig, runs: &[Vec<Checkpoint>]) -> Table {
    let mut t = Table::new(&[
        "replica",
        "n_steps",
        "maxV",
        "maxDepth",
        "ratio_V",
        "ratio_depth",
        "seed",
    ]);
    for c in runs.iter().flatten() {
        t.push(row![
            c.replica,
            c.n,
            c.max_v,
            c.max_depth,
            c.ratio_v(),
            c.ratio_depth(),
            cfg.seed
        ]);
    }
    t
}

/// Median and quartiles of `f` across replicas, per checkpoint.
fn per_n<F: Fn(&Checkpoint) -> f64>(runs: &[Vec<Checkpoint>], k: usize, f: F) -> [f64; 3] {
    let xs: Vec<f64> = runs.iter().map(|r| f(&r[k])).collect();
    [quantile(&xs, 0.25), quantile(&xs, 0.5), quantile(&xs, 0.75)]
}

fn quartile_metrics(
    o: &mut Outcome,
    cfg: &ExperimentConfig,
    runs: &[Vec<Checkpoint>],
    name: &str,
    f: impl Fn(&Checkpoint) -> f64 + Copy,
) -> Vec<f64> {
    let mut medians = Vec::new();
    let mut rows = Vec::new();
    for (k, &n) in cfg.n_steps.iter().enumerate() {
        let [q25, med, q75] = per_n(runs, k, f);
        medians.push(med);
        rows.push(serde_json::json!({"n": n, "median": med, "q25": q25, "q75": q75}));
    }
    o.metric(name, rows);
    medians
}

pub(super) fn theorem_main(cfg: &ExperimentConfig) -> Result<Outcome> {
    let runs = trajectories(cfg)?;
    let mut o = Outcome::new("theorem-main", run_table(cfg, &runs));
    o.metric("law", law_label(&cfg.law()));
    o.metric("replicas", runs.len());
    o.metric("target", 0.5);
    let medians = quartile_metrics(&mut o, cfg, &runs, "ratio_V", Checkpoint::ratio_v);
    // extrapolate the medians linearly in 1 / ln n
    let xs: Vec<f64> = cfg.n_steps.iter().map(|&n| 1.0 / (n as f64).ln()).collect();
    if let Some((slope, intercept)) = ols(&xs, &medians) {
        o.metric(
            "trend",
            serde_json::json!({"regressor": "1/ln n", "slope": slope, "extrapolated": intercept}),
        );
    }
    o.verdict("trend", Verdict::Informational);
    let monotone = medians.windows(2).all(|w| w[0] < w[1]);
    o.verdict("monotone_medians", Verdict::from_bool(monotone));
    let last = *medians.last().expect("non-empty");
    o.metric("band", RATIO_BAND);
    o.verdict(
        "band_at_largest_n",
        Verdict::from_bool(RATIO_BAND.0 <= last && last <= RATIO_BAND.1),
    );
    Ok(o)
}

/// `max |X_i| / (ln n)^3` against `8 / (3 pi^2 sigma^2)`.
pub(super) fn displacement(cfg: &ExperimentConfig) -> Result<Outcome> {
    let runs = trajectories(cfg)?;
    let law = cfg.law();
    let constant = 8.0 / (3.0 * PI * PI * law.sigma2());
    let mut o = Outcome::new("displacement", run_table(cfg, &runs));
    o.metric("law", law_label(&law));
    o.metric("replicas", runs.len());
    o.metric("sigma2", law.sigma2());
    o.metric("target", constant);
    let medians = quartile_metrics(&mut o, cfg, &runs, "ratio_depth", Checkpoint::ratio_depth);
    o.metric(
        "median_over_target",
        medians.iter().map(|m| m / constant).collect::<Vec<_>>(),
    );
    o.verdict("depth_constant", Verdict::Informational);
    Ok(o)
}
