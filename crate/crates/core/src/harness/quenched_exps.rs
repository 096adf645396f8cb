//! `gamma-scaling`, `excursion-tail` and `zr-moments`: walks against exact
//! quenched probabilities on realized arenas.

use super::config::{law_label, ExperimentConfig};
use super::output::{Outcome, Table, Verdict};
use super::{default_workers, replica_pool};
use crate::environment::TreeArena;
use crate::estimate::{EstimatorKind, RunningStats};
use crate::quenched::{
    gamma_r_curve, restricted_line, stopping_line, ExploreLimits, GammaCurve, LadderGrid, Rejection,
};
use crate::rng::{self, purpose};
use crate::walk::run_excursions;
use crate::{row, Error, Result};

const SLOPE_BAND: (f64, f64) = (0.5, 1.5);
const Z_TOL: f64 = 4.0;

fn full_limits(cfg: &ExperimentConfig) -> ExploreLimits {
    ExploreLimits::depth(cfg.depth_cap).with_max_vertices(cfg.max_vertices)
}

fn certified(c: &GammaCurve) -> bool {
    let inside = |s: Option<f64>| s.is_some_and(|s| SLOPE_BAND.0 <= s && s <= SLOPE_BAND.1);
    inside(c.slope_min) && inside(c.slope_max)
}

fn monotone(c: &GammaCurve) -> bool {
    c.points.iter().all(|p| p.log_lower <= p.log_upper)
        && c.points
            .windows(2)
            .all(|w| w[1].log_lower <= w[0].log_lower && w[1].log_upper <= w[0].log_upper)
}

/// Slope of `ln gamma_r` against `-(2r)^{1/2}` on each arena.
pub(super) fn gamma_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let law = cfg.law();
    let limits = full_limits(cfg)
        .with_min_log_hit(cfg.min_log_hit)
        .with_refinement(cfg.refine_rounds, cfg.refine_step)
        .with_climb_weight(cfg.climb_weight);
    let replicas = cfg.replicas.unwrap_or(8);
    // arenas are large; build them one at a time
    let curves = replica_pool(replicas, 1, |i| {
        let mut arena = TreeArena::new(law, cfg.seed, i);
        gamma_r_curve(&mut arena, &cfg.r_list, &limits)
    })?;

    let mut t = Table::new(&[
        "replica",
        "r",
        "gamma_lower",
        "gamma_upper",
        "line_size",
        "depth_cap",
        "truncated",
    ]);
    let mut s = Table::new(&[
        "replica",
        "slope_min",
        "slope_mid",
        "slope_max",
        "certified",
        "monotone",
        "vertices",
        "rounds",
        "budget_exhausted",
    ]);
    let opt = |x: Option<f64>| x.map_or_else(|| "nan".to_string(), |v| v.to_string());
    for (i, c) in curves.iter().enumerate() {
        for p in &c.points {
            t.push(row![
                i,
                p.r,
                p.lower,
                p.upper,
                p.line_size,
                p.depth_cap,
                p.truncated
            ]);
        }
        s.push(row![
            i,
            opt(c.slope_min),
            opt(c.slope_mid),
            opt(c.slope_max),
            certified(c),
            monotone(c),
            c.explore.vertices,
            c.explore.rounds,
            c.explore.budget_exhausted
        ]);
    }
    let n_cert = curves.iter().filter(|c| certified(c)).count();
    let need = (3 * curves.len()).div_ceil(4);
    let mut o = Outcome::new("gamma-scaling", t);
    o.extra.push(("slopes".into(), s));
    o.metric("law", law_label(&law));
    o.metric("r_list", &cfg.r_list);
    o.metric("slope_band", SLOPE_BAND);
    o.metric("certified_arenas", n_cert);
    o.metric("required_arenas", need);
    o.metric(
        "slope_mid",
        curves.iter().map(|c| c.slope_mid).collect::<Vec<_>>(),
    );
    o.verdict("slope_band", Verdict::from_bool(n_cert >= need));
    o.verdict(
        "monotone_brackets",
        Verdict::from_bool(curves.iter().all(monotone)),
    );
    Ok(o)
}

/// Per-excursion hit frequency of level `r` against exact `gamma_r`.
pub(super) fn excursion_tail(cfg: &ExperimentConfig) -> Result<Outcome> {
    let law = cfg.law();
    let r = cfg.r;
    let limits = full_limits(cfg);
    let replicas = cfg.replicas.unwrap_or(3);
    struct Arena {
        lower: f64,
        upper: f64,
        line: Vec<(u32, f64, u32, f64)>,
        records: Vec<crate::walk::ExcursionRecord>,
        times_ok: bool,
    }
    let arenas = replica_pool(replicas, default_workers(), |i| {
        let mut arena = TreeArena::new(law, cfg.seed, i);
        let p = gamma_r_curve(&mut arena, &[r], &limits)?.points[0];
        let line = stopping_line(&mut arena, r, &limits)?;
        let mut rg = rng::stream(&[cfg.seed, purpose::WALK, i]);
        let run = run_excursions(&mut arena, cfg.excursions, r, &mut rg, cfg.step_cap)?;
        if run.truncated {
            return Err(Error::Budget(format!(
                "replica {i}: {} of {} excursions within step_cap = {}",
                run.records.len(),
                cfg.excursions,
                cfg.step_cap
            )));
        }
        let times = run.return_times();
        let times_ok = times.windows(2).all(|w| w[0] < w[1])
            && times
                .iter()
                .enumerate()
                .all(|(k, &t)| t + 1 >= 2 * (k as u64 + 1));
        Ok(Arena {
            lower: p.lower,
            upper: p.upper,
            line: line
                .members
                .iter()
                .map(|m| (m.vertex.0, m.potential, m.depth, m.overshoot))
                .collect(),
            records: run.records,
            times_ok,
        })
    })?;

    let mut t = Table::new(&[
        "replica",
        "excursion_idx",
        "length",
        "maxV",
        "maxDepth",
        "hit_flag",
    ]);
    let mut hits = Table::new(&[
        "replica",
        "r",
        "excursions",
        "hits",
        "frequency",
        "stderr",
        "gamma_lower",
        "gamma_upper",
        "z",
    ]);
    let mut line = Table::new(&["replica", "vertex", "V", "depth", "overshoot"]);
    let mut worst_z = 0f64;
    let mut min_gamma = f64::INFINITY;
    for (i, a) in arenas.iter().enumerate() {
        let mut st = RunningStats::new();
        for rec in &a.records {
            t.push(row![
                i,
                rec.index,
                rec.length,
                rec.max_potential,
                rec.max_depth,
                u8::from(rec.hit_probe)
            ]);
            st.push(f64::from(u8::from(rec.hit_probe)));
        }
        let est = st.estimate(EstimatorKind::DirectMonteCarlo);
        let gap = if est.value < a.lower {
            a.lower - est.value
        } else {
            (est.value - a.upper).max(0.0)
        };
        let z = if est.stderr > 0.0 {
            gap / est.stderr
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
        min_gamma = min_gamma.min(a.lower);
        let n_hits = a.records.iter().filter(|r| r.hit_probe).count();
        hits.push(row![
            i,
            r,
            a.records.len(),
            n_hits,
            est.value,
            est.stderr,
            a.lower,
            a.upper,
            z
        ]);
        for &(v, pot, d, over) in &a.line {
            line.push(row![i, v, pot, d, over]);
        }
    }
    let mut o = Outcome::new("excursion-tail", t);
    o.extra.push(("hits".into(), hits));
    o.extra.push(("line".into(), line));
    o.metric("law", law_label(&law));
    o.metric("r", r);
    o.metric("excursions", cfg.excursions);
    o.metric("min_gamma_lower", min_gamma);
    o.metric("max_z", worst_z);
    o.verdict("hit_frequency", Verdict::from_bool(worst_z <= Z_TOL));
    o.verdict(
        "return_times",
        Verdict::from_bool(arenas.iter().all(|a| a.times_ok)),
    );
    Ok(o)
}

/// Monte Carlo `Z_r` against its exact quenched first moment.
pub(super) fn zr_moments(cfg: &ExperimentConfig) -> Result<Outcome> {
    let law = cfg.law();
    let grid = LadderGrid::new(cfg.r, cfg.chi, cfg.theta, cfg.eps, cfg.eps1, cfg.beta)
        .map_err(|e| Error::Config(e.to_string()))?;
    let limits = full_limits(cfg);
    let replicas = cfg.replicas.unwrap_or(5);
    let rows = replica_pool(replicas, default_workers(), |i| {
        let mut arena = TreeArena::new(law, cfg.seed, i);
        let rl = restricted_line(&mut arena, &grid, &limits)?;
        if !rl.exact {
            return Err(Error::Budget(format!(
                "replica {i}: restricted line not resolved within depth_cap = {} and max_vertices = {}",
                cfg.depth_cap, cfg.max_vertices
            )));
        }
        let counts = rl.count_visits(&mut arena, cfg.excursions, cfg.seed, cfg.step_cap);
        if counts.censored > 0 {
            return Err(Error::Budget(format!(
                "replica {i}: {} excursions exceeded step_cap = {}",
                counts.censored, cfg.step_cap
            )));
        }
        let mut rej = [0usize; 5];
        for (_, why) in &rl.rejections {
            rej[match why {
                Rejection::Overshoot => 0,
                Rejection::LowMinimum => 1,
                Rejection::TooDeep => 2,
                Rejection::Corridor => 3,
                Rejection::Branching => 4,
            }] += 1;
        }
        let mean = counts.mean_count();
        let second = counts
            .counts
            .iter()
            .map(|&c| f64::from(c).powi(2))
            .sum::<f64>()
            / counts.counts.len().max(1) as f64;
        Ok((
            rl.members.len(),
            rl.line.members.len(),
            rl.first_moment,
            mean,
            second,
            rej,
        ))
    })?;

    let mut t = Table::new(&[
        "replica",
        "r",
        "members",
        "line_size",
        "first_moment",
        "excursions",
        "mean_Z",
        "stderr",
        "z",
        "mean_Z2",
    ]);
    let mut rt = Table::new(&[
        "replica",
        "overshoot",
        "low_minimum",
        "too_deep",
        "corridor",
        "branching",
    ]);
    let mut worst = 0f64;
    for (i, (members, line, first, mean, second, rej)) in rows.iter().enumerate() {
        let z = mean.z_score(*first);
        worst = worst.max(z);
        t.push(row![
            i,
            cfg.r,
            members,
            line,
            first,
            cfg.excursions,
            mean.value,
            mean.stderr,
            z,
            second
        ]);
        rt.push(row![i, rej[0], rej[1], rej[2], rej[3], rej[4]]);
    }
    let mut o = Outcome::new("zr-moments", t);
    o.extra.push(("rejections".into(), rt));
    o.metric("law", law_label(&law));
    o.metric("grid", &grid);
    o.metric("max_z", worst);
    o.verdict("first_moment", Verdict::from_bool(worst <= Z_TOL));
    o.verdict("second_moment", Verdict::Informational);
    Ok(o)
}
