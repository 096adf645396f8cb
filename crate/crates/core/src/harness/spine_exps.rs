//! `verify-law`, `spine-check` and `mu-l`.

use super::config::{law_label, ExperimentConfig};
use super::output::{Outcome, Table, Verdict};
use super::{default_workers, replica_pool};
use crate::environment::{verify_boundary_case, EnvironmentLaw, TreeArena, VerifyMethod};
use crate::quenched::{embedded_tree_census, BlockParams};
use crate::rng::{self, purpose};
use crate::spine::{
    c4_threshold, enumerate_generation, many_to_one, many_to_one_line, martingale_check,
    mu_l as spine_mu_l, overshoot_moment, w1_second_moment, MuIndicators, SignTable, SpineConfig,
    DEFAULT_STEP_CAP,
};
use crate::{row, Error, Result};

const EXACT_TOL: f64 = 1e-12;
const MC_TOL: f64 = 4.0;
const ORACLE_TOL: f64 = 3.0;
/// Fraction of random tables that must agree with enumeration.
const ORACLE_QUORUM: f64 = 0.9;
const MARTINGALE_GENERATION: usize = 10;
const MARTINGALE_POPULATION: usize = 1 << 16;

/// Closed-form and Monte Carlo boundary-case checks for every configured law.
pub(super) fn verify_law(cfg: &ExperimentConfig) -> Result<Outcome> {
    let samples = cfg.samples.unwrap_or(100_000);
    let mut t = Table::new(&[
        "law",
        "method",
        "m0",
        "m0_stderr",
        "m1",
        "m1_stderr",
        "sigma2",
        "sigma2_stderr",
        "samples",
    ]);
    let mut probes = Table::new(&["law", "delta", "neg_tilt", "pos_tilt", "count_moment"]);
    let mut o = Outcome::new("verify-law", Table::default());
    for (k, law) in cfg.laws.iter().enumerate() {
        let label = law_label(law);
        let closed = verify_boundary_case(law, VerifyMethod::ClosedForm, 0, 0);
        let mc_seed = rng::child_key(cfg.seed, k as u64);
        let mc = verify_boundary_case(law, VerifyMethod::MonteCarlo, samples, mc_seed);
        for (name, rep, n) in [("closed_form", &closed, 0), ("monte_carlo", &mc, samples)] {
            t.push(row![
                label,
                name,
                rep.m0.value,
                rep.m0.stderr,
                rep.m1.value,
                rep.m1.stderr,
                rep.sigma2.value,
                rep.sigma2.stderr,
                n
            ]);
        }
        for p in &closed.delta_report {
            probes.push(row![
                label,
                p.delta,
                p.neg_tilt.value,
                p.pos_tilt.value,
                p.count_moment.value
            ]);
        }
        o.metric(
            &label,
            serde_json::json!({
                "m0": closed.m0.value,
                "m1": closed.m1.value,
                "sigma2": closed.sigma2.value,
                "mc_m0": mc.m0,
                "mc_m1": mc.m1,
                "mc_sigma2": mc.sigma2,
            }),
        );
        let exact = (closed.m0.value - 1.0).abs() < EXACT_TOL && closed.m1.value.abs() < EXACT_TOL;
        o.verdict(&format!("{label}/closed_form"), Verdict::from_bool(exact));
        let mc_ok = mc.m0.within(1.0, MC_TOL)
            && mc.m1.within(0.0, MC_TOL)
            && mc.sigma2.within(closed.sigma2.value, MC_TOL);
        o.verdict(&format!("{label}/monte_carlo"), Verdict::from_bool(mc_ok));
    }
    o.table = t;
    o.extra.push(("integrability".into(), probes));
    Ok(o)
}

fn spine_table() -> Table {
    Table::new(&[
        "estimator",
        "target",
        "n_or_r",
        "value",
        "stderr",
        "samples",
        "discards",
    ])
}

/// Many-to-one estimators against exhaustive enumeration and structural identities.
pub(super) fn spine_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let law = cfg.law();
    let samples = cfg.samples.unwrap_or(100_000);
    let mut t = spine_table();
    let mut o = Outcome::new("spine-check", Table::default());
    o.metric("law", law_label(&law));

    // random tabulated functions of the spine signs, two-point law only
    if matches!(law, EnvironmentLaw::TwoPoint { .. }) {
        if cfg.max_generation == 0 || cfg.max_generation > 10 {
            return Err(Error::Config("max_generation must lie in 1..=10".into()));
        }
        let mut agree = 0usize;
        for i in 0..cfg.tables {
            let n = 1 + i % cfg.max_generation;
            let mut rg = rng::stream(&[cfg.seed, purpose::SPINE, 0x7461_626c, i as u64]);
            let table = SignTable::random(&mut rg, n);
            let exact = enumerate_generation(&law, n, |p| table.ln_eval(p))?;
            let sc = SpineConfig::new(samples, rng::child_key(cfg.seed, i as u64));
            let est = many_to_one(&law, n, |p| table.ln_eval(p), &sc)?;
            agree += usize::from(est.within(exact, ORACLE_TOL));
            t.push(row![
                format!("many_to_one_table_{i}"),
                exact,
                n,
                est.value,
                est.stderr,
                est.samples,
                0
            ]);
        }
        let need = (ORACLE_QUORUM * cfg.tables as f64).ceil() as usize;
        o.metric("oracle_agree", agree);
        o.metric("oracle_required", need);
        o.verdict("many_to_one_oracle", Verdict::from_bool(agree >= need));

        // first passage over 2.5 a on the lattice a Z always lands on 3 a
        let a = law.sigma2().sqrt();
        let sc = SpineConfig::new(samples, cfg.seed);
        let mass = many_to_one_line(&law, 2.5 * a, |_| 0.0, &sc)?;
        t.push(row![
            "line_size",
            (3.0 * a).exp(),
            2.5 * a,
            mass.estimate.value,
            mass.estimate.stderr,
            mass.estimate.samples,
            mass.discards
        ]);
        o.verdict("line_size", Verdict::Informational);
    } else {
        o.verdict("many_to_one_oracle", Verdict::Informational);
    }

    // g = e^{-V} on the line telescopes to one on every sample
    let sc = SpineConfig::new(samples, cfg.seed).with_step_cap(DEFAULT_STEP_CAP);
    let line = many_to_one_line(&law, cfg.r, |p| -p.end(), &sc)?;
    t.push(row![
        "line_telescoping",
        1.0,
        cfg.r,
        line.estimate.value,
        line.estimate.stderr,
        line.estimate.samples,
        line.discards
    ]);
    let exact = (line.estimate.value - 1.0).abs() <= EXACT_TOL && line.estimate.stderr <= EXACT_TOL;
    o.verdict("line_telescoping", Verdict::from_bool(exact));
    o.metric("line_discard_fraction", line.discard_fraction());

    let mc = martingale_check(
        &law,
        MARTINGALE_GENERATION,
        (samples / 10).max(1),
        cfg.seed,
        MARTINGALE_POPULATION,
    )?;
    t.push(row![
        format!("martingale_W{MARTINGALE_GENERATION}"),
        1.0,
        MARTINGALE_GENERATION,
        mc.estimate.value,
        mc.model_stderr,
        mc.estimate.samples,
        0
    ]);
    o.metric("martingale", mc);
    o.verdict(
        "martingale",
        Verdict::from_bool((mc.estimate.value - 1.0).abs() <= MC_TOL * mc.model_stderr),
    );

    let sc = SpineConfig::new(samples, cfg.seed).with_step_cap(DEFAULT_STEP_CAP / 10);
    let over = overshoot_moment(&law, cfg.c, &cfg.b_grid, &sc)?;
    for p in &over {
        for (name, e) in [("overshoot_jump", &p.jump), ("overshoot_excess", &p.excess)] {
            t.push(row![
                name, "", p.b, e.value, e.stderr, e.samples, p.discards
            ]);
        }
    }
    let jumps: Vec<f64> = over.iter().map(|p| p.jump.value).collect();
    let spread = jumps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        / jumps.iter().copied().fold(f64::INFINITY, f64::min);
    o.metric("overshoot_c", cfg.c);
    o.metric("overshoot_jump_spread", spread);
    o.metric("overshoot_diverging", over.iter().any(|p| p.diverging));
    o.verdict("overshoot", Verdict::Informational);

    o.metric("w1_second_moment", w1_second_moment(&law));
    o.metric("c4_threshold", c4_threshold(&law));
    o.table = t;
    Ok(o)
}

/// `mu_L` across block lengths and the embedded-tree census on many arenas.
pub(super) fn mu_l_census(cfg: &ExperimentConfig) -> Result<Outcome> {
    let law = cfg.law();
    let samples = cfg.samples.unwrap_or(100_000);
    let mut t = Table::new(&["L", "alpha", "c4", "value", "stderr", "samples"]);
    let mut values = Vec::new();
    for (k, &l) in cfg.l_list.iter().enumerate() {
        let sc = SpineConfig::new(samples, rng::child_key(cfg.seed, k as u64));
        let e = spine_mu_l(&law, l, cfg.alpha, cfg.c4, MuIndicators::All, &sc)
            .map_err(|e| Error::Config(e.to_string()))?;
        t.push(row![l, cfg.alpha, cfg.c4, e.value, e.stderr, e.samples]);
        values.push(e.value);
    }

    let params = BlockParams::new(cfg.census_l as u32, cfg.census_alpha, cfg.c4)
        .map_err(|e| Error::Config(e.to_string()))?;
    let replicas = cfg.replicas.unwrap_or(50);
    let censuses = replica_pool(replicas, default_workers(), |i| {
        let mut arena = TreeArena::new(law, cfg.seed, i);
        embedded_tree_census(
            &mut arena,
            &params,
            cfg.census_n as u32,
            cfg.census_max_vertices as usize,
        )
    })?;
    let mut ct = Table::new(&["replica", "n", "s", "k_count", "rhs", "holds"]);
    for (i, c) in censuses.iter().enumerate() {
        for ch in &c.checks {
            ct.push(row![i, ch.n, ch.s, ch.k_count, ch.rhs, u8::from(ch.holds)]);
        }
    }

    let mut o = Outcome::new("mu-l", t);
    o.extra.push(("census".into(), ct));
    o.metric("law", law_label(&law));
    o.metric("mu", &values);
    o.metric("c4_threshold", c4_threshold(&law));
    o.metric(
        "census",
        serde_json::json!({"L": cfg.census_l, "alpha": cfg.census_alpha, "arenas": censuses.len()}),
    );
    o.verdict(
        "mu_increasing",
        Verdict::from_bool(values.windows(2).all(|w| w[0] < w[1])),
    );
    o.verdict(
        "census_inclusion",
        Verdict::from_bool(censuses.iter().all(|c| c.all_hold())),
    );
    Ok(o)
}
