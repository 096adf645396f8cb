//! `rw1d-suite` and `extremes`.

use num::BigRational;

use super::config::{law_label, ExperimentConfig};
use super::output::{Outcome, Table, Verdict};
use crate::rng;
use crate::rw1d::{
    compute_reference_fixtures, corridor_block_product_exact, corridor_dp, corridor_dp_exact,
    corridor_mc, exit_identity, exit_sweep, extremes_check, find_fixture, fixtures_path,
    ladder_height, ladder_stats, lattice_exit_prob, lattice_exit_ratio, read_fixtures,
    write_fixtures, Corridor, CorridorMode, StepLaw1D, DP_STATE_BUDGET, GAUSSIAN_LADDER,
};
use crate::{row, Error, Result};

use super::RunOptions;

const EXPONENT_BAND: (f64, f64) = (0.6, 1.6);
const EXTREMES_BAND: (f64, f64) = (0.85, 1.15);
const MC_TOL: f64 = 4.0;
const LADDER_STEP_CAP: u64 = 100_000;
/// Corridor cell compared against Monte Carlo.
const MC_CELL: (f64, f64) = (40.0, 6.0);
/// Largest `(r, lambda)` of the exact block-product comparison.
const BLOCK_MAX: (u32, u32) = (10, 4);
const MODES: [CorridorMode; 2] = [CorridorMode::NoFloor, CorridorMode::WithFloor];

fn lattice() -> StepLaw1D {
    StepLaw1D::SimpleLattice
}

pub(super) fn rw1d_suite(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let samples = cfg.samples.unwrap_or(100_000);
    let seed = |k: u64| rng::child_key(cfg.seed, k);
    let gaussian = StepLaw1D::Gaussian { sigma: 1.0 };
    let mut o = Outcome::new("rw1d-suite", Table::default());

    // two-sided exits
    let mut ex = Table::new(&["law", "a", "b", "prob", "stderr", "samples", "exact"]);
    let mut exact_ok = true;
    for a in 1..=cfg.exit_max {
        for b in 1..=cfg.exit_max {
            let want = BigRational::new(b.into(), (a + b).into());
            exact_ok &= lattice_exit_ratio(a, b) == want;
            let p = lattice_exit_prob(a, b);
            ex.push(row![
                lattice().name(),
                a,
                b,
                p,
                0.0,
                0,
                b as f64 / (a + b) as f64
            ]);
        }
    }
    o.verdict("lattice_exit_exact", Verdict::from_bool(exact_ok));
    let levels: Vec<(f64, f64)> = (1..=cfg.exit_max)
        .flat_map(|a| (1..=cfg.exit_max).map(move |b| (a as f64, b as f64)))
        .collect();
    let sweep = exit_sweep(&gaussian, &levels, (samples / 10).max(1), seed(1))?;
    for c in &sweep.cells {
        ex.push(row![
            gaussian.name(),
            c.a,
            c.b,
            c.estimate.value,
            c.estimate.stderr,
            c.estimate.samples,
            ""
        ]);
    }
    o.metric("gaussian_exit_band", sweep.band);
    o.metric("gaussian_exit_band_stderr", sweep.band_stderr);
    o.verdict(
        "gaussian_exit_band",
        Verdict::from_bool(sweep.band.is_finite()),
    );

    // drawdown corridors
    let mut t = Table::new(&[
        "law", "r", "lambda", "mode", "method", "prob", "stderr", "samples",
    ]);
    let mut exponents = Vec::new();
    for &(r, l) in &cfg.corridor_cells {
        for mode in MODES {
            let c = Corridor::new(r, l, mode).map_err(|e| Error::Config(e.to_string()))?;
            let p = corridor_dp(&c, DP_STATE_BUDGET)?;
            t.push(row![
                lattice().name(),
                r,
                l,
                mode.as_str(),
                "lattice_dp",
                p,
                0.0,
                0
            ]);
            exponents.push(serde_json::json!({
                "r": r, "lambda": l, "mode": mode.as_str(), "exponent": -(l / r) * p.ln()
            }));
        }
    }
    let in_band = exponents.iter().all(|e| {
        let x = e["exponent"].as_f64().unwrap_or(f64::NAN);
        EXPONENT_BAND.0 <= x && x <= EXPONENT_BAND.1
    });
    o.metric("corridor_exponents", exponents);
    o.verdict("corridor_exponent", Verdict::from_bool(in_band));

    let mut mc_ok = true;
    for (k, mode) in MODES.into_iter().enumerate() {
        let c = Corridor::new(MC_CELL.0, MC_CELL.1, mode)?;
        let dp = corridor_dp(&c, DP_STATE_BUDGET)?;
        let mc = corridor_mc(&lattice(), &c, samples, seed(10 + k as u64));
        mc_ok &= mc.within(dp, MC_TOL);
        t.push(row![
            lattice().name(),
            MC_CELL.0,
            MC_CELL.1,
            mode.as_str(),
            "mc",
            mc.value,
            mc.stderr,
            mc.samples
        ]);
    }
    o.verdict("corridor_dp_vs_mc", Verdict::from_bool(mc_ok));

    let mut block_ok = true;
    for r in 1..=BLOCK_MAX.0 {
        for l in 1..=BLOCK_MAX.1 {
            let c = Corridor::new(f64::from(r), f64::from(l), CorridorMode::NoFloor)?;
            block_ok &= corridor_dp_exact(&c, DP_STATE_BUDGET)? == corridor_block_product_exact(&c);
        }
    }
    o.verdict("corridor_block_product", Verdict::from_bool(block_ok));

    let mut monotone = true;
    for mode in MODES {
        for l in 1..=6 {
            let mut prev = 1.0;
            for r in 1..=30 {
                let p = corridor_dp(
                    &Corridor::new(f64::from(r), f64::from(l), mode)?,
                    DP_STATE_BUDGET,
                )?;
                let wider = corridor_dp(
                    &Corridor::new(f64::from(r), f64::from(l + 1), mode)?,
                    DP_STATE_BUDGET,
                )?;
                monotone &= (0.0..=1.0).contains(&p) && p <= prev && p <= wider;
                prev = p;
            }
        }
    }
    o.verdict("corridor_monotone", Verdict::from_bool(monotone));

    // ladder heights, fixtures and the exit identity
    if opts.refresh_fixtures {
        let fx = compute_reference_fixtures(cfg.fixture_samples, cfg.seed);
        write_fixtures(&fixtures_path(), &fx)?;
    }
    let fixtures = read_fixtures(&fixtures_path())?;
    let reference = find_fixture(&fixtures, GAUSSIAN_LADDER)
        .ok_or_else(|| Error::Io(format!("no `{GAUSSIAN_LADDER}` fixture")))?;
    let mut lt = Table::new(&[
        "law",
        "quantity",
        "level",
        "value",
        "stderr",
        "samples",
        "discards",
        "reference",
    ]);
    let (lh, ld) = ladder_height(&lattice(), samples, seed(20), LADDER_STEP_CAP);
    lt.push(row![
        lattice().name(),
        "ladder_height",
        0,
        lh.value,
        lh.stderr,
        lh.samples,
        ld,
        1
    ]);
    o.verdict("lattice_ladder_height", Verdict::from_bool(lh.value == 1.0));
    let (gh, gd) = ladder_height(&gaussian, samples, seed(21), LADDER_STEP_CAP);
    lt.push(row![
        gaussian.name(),
        "ladder_height",
        0,
        gh.value,
        gh.stderr,
        gh.samples,
        gd,
        reference.value
    ]);
    let z = (gh.value - reference.value).abs() / gh.stderr.hypot(reference.stderr);
    o.metric("gaussian_ladder_z", z);
    o.verdict("gaussian_ladder_fixture", Verdict::from_bool(z <= MC_TOL));

    let (id, id_disc) = exit_identity(
        &gaussian,
        1.0,
        &[1e2, 1e3, 1e4],
        (samples / 10).max(1),
        seed(22),
        LADDER_STEP_CAP,
    )?;
    lt.push(row![
        gaussian.name(),
        "first_passage_value",
        id.a,
        id.ladder_mean.value,
        id.ladder_mean.stderr,
        id.ladder_mean.samples,
        id_disc,
        ""
    ]);
    for (b, e) in &id.scaled {
        lt.push(row![
            gaussian.name(),
            "scaled_exit_down",
            b,
            e.value,
            e.stderr,
            e.samples,
            0,
            id.ladder_mean.value
        ]);
    }
    o.verdict("exit_identity", Verdict::Informational);

    let spine = StepLaw1D::Spine(cfg.law());
    let st = ladder_stats(&spine, samples, seed(23), &cfg.b_grid, LADDER_STEP_CAP)?;
    for s in &st.overshoots {
        lt.push(row![
            law_label(&cfg.law()),
            "overshoot_excess",
            s.b,
            s.excess.value,
            s.excess.stderr,
            s.excess.samples,
            s.discards,
            ""
        ]);
        lt.push(row![
            law_label(&cfg.law()),
            "overshoot_jump",
            s.b,
            s.jump.value,
            s.jump.stderr,
            s.jump.samples,
            s.discards,
            ""
        ]);
    }
    o.verdict("spine_overshoot", Verdict::Informational);

    o.table = t;
    o.extra.push(("exit".into(), ex));
    o.extra.push(("ladder".into(), lt));
    Ok(o)
}

pub(super) fn extremes(cfg: &ExperimentConfig) -> Result<Outcome> {
    let replicas = cfg.replicas.unwrap_or(100);
    let mut t = Table::new(&["alpha", "n", "replica", "ratio"]);
    let mut s = Table::new(&[
        "alpha",
        "n",
        "replicas",
        "median",
        "q25",
        "q75",
        "median_times_alpha",
    ]);
    let mut o = Outcome::new("extremes", Table::default());
    for (k, &alpha) in cfg.xi_alphas.iter().enumerate() {
        let e = extremes_check(
            alpha,
            cfg.extremes_n,
            replicas,
            rng::child_key(cfg.seed, k as u64),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        for (i, r) in e.ratios.iter().enumerate() {
            t.push(row![alpha, e.n, i, r]);
        }
        let scaled = e.median * alpha;
        s.push(row![alpha, e.n, replicas, e.median, e.q25, e.q75, scaled]);
        let v = if e.n >= 10_000 {
            Verdict::from_bool(EXTREMES_BAND.0 <= scaled && scaled <= EXTREMES_BAND.1)
        } else {
            Verdict::Informational
        };
        o.verdict(&format!("alpha={alpha}"), v);
    }
    o.metric("band", EXTREMES_BAND);
    o.table = t;
    o.extra.push(("summary".into(), s));
    Ok(o)
}
