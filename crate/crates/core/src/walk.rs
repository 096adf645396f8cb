//! The quenched walk on a realized tree, its excursions and running maxima.

use rand::Rng;
use serde::Serialize;

use crate::environment::{TreeArena, VertexId};
use crate::error::{Error, Result};
use crate::estimate::{Estimate, EstimatorKind, RunningStats};

/// Default per-run step budget.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Largest run for which a full trajectory may be recorded.
pub const MAX_TRACE_STEPS: u64 = 1_000_000;

/// Position and running statistics of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkState {
    pub position: VertexId,
    pub steps: u64,
    pub max_potential: f64,
    pub max_depth: u32,
    /// Number of visits to `BACK_ROOT` so far, i.e. the index of the current excursion.
    pub back_root_hits: u64,
}

impl WalkState {
    /// The walk at time 0, sitting at the root.
    pub fn at_root() -> Self {
        Self {
            position: VertexId::ROOT,
            steps: 0,
            max_potential: 0.0,
            max_depth: 0,
            back_root_hits: 0,
        }
    }
}

/// Sample the next vertex from `x`, expanding it first if needed.
#[inline]
pub fn next_vertex<R: Rng + ?Sized>(arena: &mut TreeArena, x: VertexId, rng: &mut R) -> VertexId {
    if x == VertexId::BACK_ROOT {
        return VertexId::ROOT;
    }
    let kids = arena.expand(x);
    let rec = arena.record(x);
    let lambda = rec.lambda().unwrap_or(0.0);
    let parent = rec.parent().expect("tree vertices have a parent");
    let mut u = rng.random::<f64>() * (1.0 + lambda);
    if u < 1.0 || kids.is_empty() {
        return parent;
    }
    u -= 1.0;
    let last = kids.end - 1;
    for c in kids {
        let w = (-arena.record(VertexId(c)).displacement()).exp();
        if u < w || c == last {
            return VertexId(c);
        }
        u -= w;
    }
    unreachable!()
}

/// Advance the walk by one step and update its running statistics.
#[inline]
pub fn step<R: Rng + ?Sized>(arena: &mut TreeArena, state: &mut WalkState, rng: &mut R) {
    let y = next_vertex(arena, state.position, rng);
    state.position = y;
    state.steps += 1;
    if y == VertexId::BACK_ROOT {
        state.back_root_hits += 1;
    } else {
        let rec = arena.record(y);
        if rec.potential() > state.max_potential {
            state.max_potential = rec.potential();
        }
        if rec.depth() > state.max_depth {
            state.max_depth = rec.depth();
        }
    }
}

/// Statistics of one excursion away from `BACK_ROOT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcursionRecord {
    pub index: u64,
    /// Steps taken, including the final step into `BACK_ROOT`.
    pub length: u64,
    pub max_potential: f64,
    pub max_depth: u32,
    /// Whether the excursion reached potential `probe_r` (i.e. hit the stopping line).
    pub hit_probe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionRun {
    pub records: Vec<ExcursionRecord>,
    pub total_steps: u64,
    /// The step budget ran out before the requested number of excursions completed.
    pub truncated: bool,
}

impl ExcursionRun {
    /// Return times `rho_1 < rho_2 < ...` to `BACK_ROOT`.
    pub fn return_times(&self) -> Vec<u64> {
        self.records
            .iter()
            .scan(0u64, |t, r| {
                *t += r.length;
                Some(*t)
            })
            .collect()
    }
}

/// Run one excursion from `start` (the root for the first excursion, `BACK_ROOT`
/// otherwise) until the walk enters `BACK_ROOT`.
///
/// `visit` sees every vertex occupied during the excursion, including the start.
/// Returns `(length, max potential, max depth, completed)`.
pub fn excursion<R, F>(
    arena: &mut TreeArena,
    start: VertexId,
    rng: &mut R,
    step_budget: u64,
    mut visit: F,
) -> (u64, f64, u32, bool)
where
    R: Rng + ?Sized,
    F: FnMut(&TreeArena, VertexId),
{
    let mut x = start;
    let mut len = 0u64;
    let mut max_v = arena.potential(start);
    let mut max_d = arena.depth(start);
    visit(arena, x);
    loop {
        if len >= step_budget {
            return (len, max_v, max_d, false);
        }
        x = next_vertex(arena, x, rng);
        len += 1;
        if x == VertexId::BACK_ROOT {
            visit(arena, x);
            return (len, max_v, max_d, true);
        }
        let rec = arena.record(x);
        max_v = max_v.max(rec.potential());
        max_d = max_d.max(rec.depth());
        visit(arena, x);
    }
}

/// Simulate until the `n_excursions`-th visit to `BACK_ROOT`.
///
/// The walk starts at the root; the first excursion ends at `rho_1`, each later
/// one starts with the forced step from `BACK_ROOT` to the root.
pub fn run_excursions<R: Rng + ?Sized>(
    arena: &mut TreeArena,
    n_excursions: u64,
    probe_r: f64,
    rng: &mut R,
    step_cap: u64,
) -> Result<ExcursionRun> {
    if n_excursions == 0 {
        return Err(Error::Usage("n_excursions must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(n_excursions as usize);
    let mut total = 0u64;
    let mut start = VertexId::ROOT;
    for index in 0..n_excursions {
        let (length, max_v, max_d, done) =
            excursion(arena, start, rng, step_cap - total, |_, _| {});
        total += length;
        if !done {
            return Ok(ExcursionRun {
                records,
                total_steps: total,
                truncated: true,
            });
        }
        records.push(ExcursionRecord {
            index,
            length,
            max_potential: max_v,
            max_depth: max_d,
            hit_probe: max_v >= probe_r,
        });
        start = VertexId::BACK_ROOT;
    }
    Ok(ExcursionRun {
        records,
        total_steps: total,
        truncated: false,
    })
}

/// What the walk does when it steps onto a vertex during a hit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    /// Carry on from the vertex.
    Pass,
    /// Record the vertex as hit and carry on.
    Hit,
    /// Record the vertex as hit and step straight back to its parent.
    HitReflect,
    /// Step straight back to the parent without recording anything.
    Reflect,
}

/// Per-excursion counts of distinct target vertices hit before `BACK_ROOT`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitCounts {
    /// Distinct targets hit, one entry per completed excursion.
    pub counts: Vec<u32>,
    /// Excursions that ran out of steps; they are left out of `counts`.
    pub censored: u64,
    pub total_steps: u64,
}

impl HitCounts {
    /// Fraction of completed excursions that hit at least one target.
    pub fn hit_frequency(&self) -> Estimate {
        let mut st = RunningStats::new();
        self.counts
            .iter()
            .for_each(|&c| st.push(f64::from(u8::from(c > 0))));
        st.estimate(EstimatorKind::DirectMonteCarlo)
    }

    /// Mean number of distinct targets hit per excursion.
    pub fn mean_count(&self) -> Estimate {
        let mut st = RunningStats::new();
        self.counts.iter().for_each(|&c| st.push(f64::from(c)));
        st.estimate(EstimatorKind::DirectMonteCarlo)
    }
}

/// Run independent excursions from the root and count the distinct target
/// vertices each one hits before entering `BACK_ROOT`.
///
/// `classify` decides what happens on each vertex the walk steps onto. The
/// walk is recurrent, so after entering the subtree of a vertex it returns to
/// the parent almost surely; reflecting at vertices whose subtrees hold no
/// targets leaves the set of hit targets unchanged in law while keeping
/// excursions finite. With `stop_on_first` an excursion ends at its first hit.
///
/// Each excursion uses its own random stream keyed by `seed` and its index.
pub fn count_hits<F>(
    arena: &mut TreeArena,
    excursions: u64,
    seed: u64,
    step_cap: u64,
    stop_on_first: bool,
    mut classify: F,
) -> HitCounts
where
    F: FnMut(&TreeArena, VertexId) -> Visit,
{
    let mut out = HitCounts {
        counts: Vec::with_capacity(excursions as usize),
        censored: 0,
        total_steps: 0,
    };
    let mut seen: Vec<VertexId> = Vec::new();
    for i in 0..excursions {
        let mut rg = crate::rng::stream(&[seed, crate::rng::purpose::WALK, arena.replica(), i]);
        seen.clear();
        let mut x = VertexId::ROOT;
        let mut steps = 0u64;
        let done = loop {
            if steps >= step_cap {
                break false;
            }
            let y = next_vertex(arena, x, &mut rg);
            steps += 1;
            if y == VertexId::BACK_ROOT {
                break true;
            }
            let action = classify(arena, y);
            if matches!(action, Visit::Hit | Visit::HitReflect) {
                if !seen.contains(&y) {
                    seen.push(y);
                }
                if stop_on_first {
                    break true;
                }
            }
            match action {
                Visit::Pass | Visit::Hit => x = y,
                // the return step to the parent
                Visit::Reflect | Visit::HitReflect => steps += 1,
            }
        };
        out.total_steps += steps;
        if done {
            out.counts.push(seen.len() as u32);
        } else {
            out.censored += 1;
        }
    }
    out
}

/// Summary of the first `n_steps` steps from the root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub n_steps: u64,
    pub max_potential: f64,
    pub max_depth: u32,
    pub final_potential: f64,
    pub final_depth: u32,
    pub back_root_hits: u64,
    /// `max V / (ln n)^2`.
    pub ratio_potential: f64,
    /// `max depth / (ln n)^3`.
    pub ratio_depth: f64,
}

pub fn run_steps<R: Rng + ?Sized>(
    arena: &mut TreeArena,
    n_steps: u64,
    rng: &mut R,
) -> Result<TrajectorySummary> {
    if n_steps == 0 {
        return Err(Error::Usage("n_steps must be at least 1".into()));
    }
    let mut s = WalkState::at_root();
    for _ in 0..n_steps {
        step(arena, &mut s, rng);
    }
    let ln = (n_steps as f64).ln();
    Ok(TrajectorySummary {
        n_steps,
        max_potential: s.max_potential,
        max_depth: s.max_depth,
        final_potential: arena.potential(s.position),
        final_depth: arena.depth(s.position),
        back_root_hits: s.back_root_hits,
        ratio_potential: s.max_potential / (ln * ln),
        ratio_depth: s.max_depth as f64 / (ln * ln * ln),
    })
}

/// Full trajectory of a short run (debugging aid).
pub fn trace_steps<R: Rng + ?Sized>(
    arena: &mut TreeArena,
    n_steps: u64,
    rng: &mut R,
) -> Result<Vec<VertexId>> {
    if n_steps > MAX_TRACE_STEPS {
        return Err(Error::Budget(format!(
            "trajectory tracing is limited to {MAX_TRACE_STEPS} steps"
        )));
    }
    let mut out = Vec::with_capacity(n_steps as usize + 1);
    let mut s = WalkState::at_root();
    out.push(s.position);
    for _ in 0..n_steps {
        step(arena, &mut s, rng);
        out.push(s.position);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentLaw;
    use crate::rng;

    #[test]
    fn back_root_reflects() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 1, 0);
        let mut r = rng::stream(&[1]);
        for _ in 0..100 {
            assert_eq!(
                next_vertex(&mut a, VertexId::BACK_ROOT, &mut r),
                VertexId::ROOT
            );
        }
    }

    #[test]
    fn balanced_vertex_is_a_fair_coin() {
        // root -> single child with dV = 0, and that child is a leaf.
        let mut a = TreeArena::frozen();
        let c = VertexId(a.set_children(VertexId::ROOT, &[0.0]).unwrap().start);
        let mut r = rng::stream(&[2]);
        let n = 100_000;
        let ups = (0..n)
            .filter(|_| next_vertex(&mut a, VertexId::ROOT, &mut r) == c)
            .count() as f64;
        let p = ups / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn same_seed_same_trajectory() {
        let law = EnvironmentLaw::two_point();
        let run = || {
            let mut a = TreeArena::new(law, 3, 2);
            let mut r = rng::stream(&[3, 2]);
            trace_steps(&mut a, 5000, &mut r)
                .unwrap()
                .into_iter()
                .map(|v| (a.depth(v), a.potential(v).to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn single_step_support() {
        for seed in 0..50 {
            let mut a = TreeArena::new(EnvironmentLaw::two_point(), seed, 0);
            let mut r = rng::stream(&[seed, 9]);
            let s = run_steps(&mut a, 1, &mut r).unwrap();
            assert!(s.max_depth <= 1);
            let kids: Vec<f64> = a.children(VertexId::ROOT).map(|c| a.potential(c)).collect();
            assert!(s.max_potential == 0.0 || kids.contains(&s.max_potential));
        }
    }

    #[test]
    fn return_times_grow_and_respect_lower_bound() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 5, 0);
        let mut r = rng::stream(&[5]);
        let run = run_excursions(&mut a, 200, 3.0, &mut r, DEFAULT_STEP_CAP).unwrap();
        assert!(!run.truncated);
        let rho = run.return_times();
        for (i, w) in rho.iter().enumerate() {
            assert!(*w >= 2 * (i as u64 + 1) - 1);
        }
        assert!(rho.windows(2).all(|w| w[0] < w[1]));
        assert!(run.records.iter().skip(1).all(|e| e.length >= 2));
    }

    #[test]
    fn steep_child_keeps_excursions_short() {
        let mut a = TreeArena::frozen();
        a.set_children(VertexId::ROOT, &[50.0]).unwrap();
        let mut r = rng::stream(&[6]);
        let run = run_excursions(&mut a, 1000, 1.0, &mut r, DEFAULT_STEP_CAP).unwrap();
        assert!(run.records.iter().all(|e| e.max_depth == 0));
        assert!(run.records.iter().skip(1).all(|e| e.length == 2));
    }

    #[test]
    fn hit_counts_on_a_fair_fork() {
        // root -> single leaf child with dV = 0: each excursion hits it with probability 1/2
        let mut a = TreeArena::frozen();
        let c = VertexId(a.set_children(VertexId::ROOT, &[0.0]).unwrap().start);
        let counts = count_hits(&mut a, 20_000, 1, 1_000, true, |_, y| {
            if y == c {
                Visit::HitReflect
            } else {
                Visit::Pass
            }
        });
        assert_eq!(counts.censored, 0);
        assert!(counts.hit_frequency().within(0.5, 4.0));
        assert_eq!(counts.mean_count().value, counts.hit_frequency().value);
        // without stopping, repeat visits still count once
        let again = count_hits(&mut a, 2_000, 1, 1_000, false, |_, y| {
            if y == c {
                Visit::HitReflect
            } else {
                Visit::Pass
            }
        });
        assert!(again.counts.iter().all(|&k| k <= 1));
    }

    #[test]
    fn hit_counts_censor_long_excursions() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 4, 0);
        let counts = count_hits(&mut a, 100, 2, 1, false, |_, _| Visit::Pass);
        assert_eq!(counts.counts.len() as u64 + counts.censored, 100);
        assert!(counts.censored > 0);
    }

    #[test]
    fn step_budget_truncates() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 8, 0);
        let mut r = rng::stream(&[8]);
        let run = run_excursions(&mut a, 1_000_000, 3.0, &mut r, 1000).unwrap();
        assert!(run.truncated);
        assert!(run.total_steps <= 1000);
    }
}
