//! First-passage stopping lines `H_r` and bracketed absorption curves.

use serde::Serialize;

use super::conductance::log_prob_from_conductance;
use crate::environment::{TreeArena, VertexId};
use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, LogSumExp};

/// Limits on how much of the tree an exploration may realize.
///
/// A vertex `x` is expanded only while its chain-current score is at least
/// `min_log_hit`. From the root the score is `ln P(T_x < T_{BACK_ROOT})`; in later
/// refinement rounds it is recomputed from the escape probabilities of the
/// explored network (see [`explore_refined`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExploreLimits {
    /// Vertices at this depth are not expanded.
    pub depth_cap: u32,
    /// Score threshold of the first round.
    pub min_log_hit: f64,
    /// Arena size at which expansion stops; what is left is truncated.
    pub max_vertices: usize,
    /// Extra refinement rounds after the first.
    pub refine_rounds: u32,
    /// Decrease of the score threshold per refinement round.
    pub refine_step: f64,
    /// Weight `k` of the climb penalty `-k sqrt(2 (r - V))` added to scores.
    pub climb_weight: f64,
}

impl ExploreLimits {
    pub fn depth(depth_cap: u32) -> Self {
        Self {
            depth_cap,
            min_log_hit: f64::NEG_INFINITY,
            max_vertices: 60_000_000,
            refine_rounds: 0,
            refine_step: 1.0,
            climb_weight: 0.0,
        }
    }

    pub fn with_min_log_hit(mut self, t: f64) -> Self {
        self.min_log_hit = t;
        self
    }

    pub fn with_max_vertices(mut self, n: usize) -> Self {
        self.max_vertices = n;
        self
    }

    pub fn with_climb_weight(mut self, k: f64) -> Self {
        self.climb_weight = k;
        self
    }

    pub fn with_refinement(mut self, rounds: u32, step: f64) -> Self {
        self.refine_rounds = rounds;
        self.refine_step = step;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineMember {
    pub vertex: VertexId,
    pub potential: f64,
    pub depth: u32,
    /// `V(x) - r`.
    pub overshoot: f64,
}

/// The vertices at which paths from the root first reach potential `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingLine {
    pub r: f64,
    pub members: Vec<LineMember>,
    /// Unexplored vertices whose path maximum is still below `r`.
    pub truncated: Vec<VertexId>,
    /// The realized tree died out below level `r` with nothing truncated.
    pub extinct: bool,
}

impl StoppingLine {
    pub fn is_complete(&self) -> bool {
        self.truncated.is_empty()
    }

    pub fn vertices(&self) -> Vec<VertexId> {
        self.members.iter().map(|m| m.vertex).collect()
    }
}

/// Outcome of one exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GrowStatus {
    pub budget_exhausted: bool,
}

fn climb(limits: &ExploreLimits, r: f64, v: f64) -> f64 {
    if limits.climb_weight == 0.0 {
        0.0
    } else {
        limits.climb_weight * (2.0 * (r - v).max(0.0)).sqrt()
    }
}

/// Depth-first growth from `start` that stops at first passage above `r`.
///
/// The score of a vertex `z` below `start` is `log_w - ln sum_{u in [start, z]}
/// e^{V(u)}`: the current `z` would draw if it were absorbing and its path from
/// the parent of `start` were the only route, with escape probability `e^{log_w}`
/// at that parent. `on_stop(x, true)` reports members, `on_stop(x, false)`
/// vertices left unexpanded.
fn grow<F>(
    arena: &mut TreeArena,
    start: VertexId,
    log_w: f64,
    r: f64,
    theta: f64,
    limits: &ExploreLimits,
    on_stop: &mut F,
) -> GrowStatus
where
    F: FnMut(&TreeArena, VertexId, bool),
{
    let mut exhausted = false;
    let mut stack: Vec<(VertexId, f64)> = vec![(start, arena.potential(start))];
    while let Some((x, series)) = stack.pop() {
        if arena.potential(x) >= r {
            on_stop(arena, x, true);
            continue;
        }
        if arena.is_expanded(x) {
            // already realized by an earlier pass
        } else if arena.depth(x) >= limits.depth_cap
            || log_w - series - climb(limits, r, arena.potential(x)) < theta
        {
            on_stop(arena, x, false);
            continue;
        } else if arena.len() >= limits.max_vertices {
            exhausted = true;
            on_stop(arena, x, false);
            continue;
        }
        let range = arena.expand(x);
        for c in range.rev() {
            let c = VertexId(c);
            stack.push((c, log_add_exp(series, arena.potential(c))));
        }
    }
    GrowStatus {
        budget_exhausted: exhausted,
    }
}

/// Realize `H_r` lazily, expanding only vertices with path maximum below `r`.
///
/// Vertices stopped by the depth cap, the score threshold or the vertex budget
/// are listed as truncated.
pub fn stopping_line(
    arena: &mut TreeArena,
    r: f64,
    limits: &ExploreLimits,
) -> Result<StoppingLine> {
    if !r.is_finite() {
        return Err(Error::Usage("level r must be finite".into()));
    }
    let mut members = Vec::new();
    let mut truncated = Vec::new();
    let theta = limits.min_log_hit;
    grow(
        arena,
        VertexId::ROOT,
        0.0,
        r,
        theta,
        limits,
        &mut |a, x, hit| {
            if hit {
                let v = a.potential(x);
                members.push(LineMember {
                    vertex: x,
                    potential: v,
                    depth: a.depth(x),
                    overshoot: v - r,
                });
            } else {
                truncated.push(x);
            }
        },
    );
    let extinct = members.is_empty() && truncated.is_empty();
    Ok(StoppingLine {
        r,
        members,
        truncated,
        extinct,
    })
}

/// Independent check that `line` is the first-passage line of the realized tree:
/// every member is the first vertex on its path at or above `r`, members form
/// an antichain, and every realized leaf strictly below `r` is either truncated
/// or a genuine leaf.
pub fn check_stopping_line(arena: &TreeArena, line: &StoppingLine) -> Result<()> {
    let mut marked = vec![0u8; arena.len()];
    for m in &line.members {
        let path = arena.path(m.vertex);
        let (last, before) = path.split_last().expect("non-empty path");
        if arena.potential(*last) < line.r {
            return Err(Error::Schema(format!("member {} is below r", last.0)));
        }
        if let Some(u) = before.iter().find(|&&u| arena.potential(u) >= line.r) {
            return Err(Error::Schema(format!(
                "member {} has ancestor {} already above r",
                last.0, u.0
            )));
        }
        if marked[last.index()] != 0 {
            return Err(Error::Schema(format!("member {} listed twice", last.0)));
        }
        marked[last.index()] = 1;
    }
    for &t in &line.truncated {
        marked[t.index()] = 2;
    }
    // Every path from the root must end in a member, a truncation or a dead end.
    let mut stack = vec![VertexId::ROOT];
    while let Some(x) = stack.pop() {
        match marked[x.index()] {
            1 => continue,
            2 => {
                if arena.potential(x) >= line.r {
                    return Err(Error::Schema(format!(
                        "truncated vertex {} is above r",
                        x.0
                    )));
                }
                continue;
            }
            _ => {}
        }
        if arena.potential(x) >= line.r {
            return Err(Error::Schema(format!(
                "vertex {} above r is not a member",
                x.0
            )));
        }
        if !arena.is_expanded(x) && arena.law().is_some() {
            return Err(Error::Schema(format!("vertex {} left unresolved", x.0)));
        }
        stack.extend(arena.children(x));
    }
    Ok(())
}

/// `ln g(v)` for every vertex of the arena, for absorption at level `r`.
///
/// Unexpanded vertices below `r` of an arena with a law are truncated: they are
/// absorbing when `truncated_absorbing` is set and dead ends otherwise. Children
/// always have larger indices than their parent, so one reverse sweep suffices.
pub fn log_conductances(arena: &TreeArena, r: f64, truncated_absorbing: bool) -> Vec<f64> {
    let n = arena.len();
    let lazy = arena.law().is_some();
    let mut lg = vec![f64::NEG_INFINITY; n];
    for i in (1..n as u32).rev() {
        let v = VertexId(i);
        let Some(range) = arena.child_range(v) else {
            if lazy && truncated_absorbing {
                lg[v.index()] = f64::INFINITY;
            }
            continue;
        };
        let mut acc = LogSumExp::new();
        for c in range {
            let c = VertexId(c);
            let vc = arena.potential(c);
            let lgc = lg[c.index()];
            if vc >= r || lgc == f64::INFINITY {
                acc.push(-vc);
            } else if lgc > f64::NEG_INFINITY {
                acc.push(-log_add_exp(vc, -lgc));
            }
        }
        lg[v.index()] = acc.value();
    }
    lg
}

/// Turn `ln g` into `ln w`, where `w(x)` is the probability that the walk from
/// `x` returns to `BACK_ROOT` before absorption. Entries of absorbing vertices
/// are left meaningless.
fn log_escape_in_place(arena: &TreeArena, r: f64, lg: &mut [f64]) {
    let root = VertexId::ROOT.index();
    lg[root] = -log_add_exp(0.0, lg[root]);
    for i in 1..arena.len() as u32 {
        let v = VertexId(i);
        if arena.potential(v) >= r {
            continue;
        }
        let Some(range) = arena.child_range(v) else {
            continue;
        };
        let lw = lg[v.index()];
        for c in range {
            let c = VertexId(c);
            let k = c.index();
            lg[k] = lw - log_add_exp(0.0, arena.potential(c) + lg[k]);
        }
    }
}

/// Unexpanded vertices below `r` reachable from the root without crossing `r`.
fn frontier(arena: &TreeArena, r: f64) -> Vec<VertexId> {
    let mut out = Vec::new();
    let mut stack = vec![VertexId::ROOT];
    while let Some(x) = stack.pop() {
        if arena.potential(x) >= r {
            continue;
        }
        match arena.child_range(x) {
            None => out.push(x),
            Some(range) => stack.extend(range.rev().map(VertexId)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExploreReport {
    pub rounds: u32,
    pub budget_exhausted: bool,
    pub vertices: usize,
}

/// Realize the tree towards `H_r` in rounds of decreasing score threshold.
///
/// The first round keeps vertices whose hitting probability is at least
/// `e^{min_log_hit}`. Each later round lowers the threshold by `refine_step`,
/// solves the network with truncated vertices absorbing, and regrows the
/// truncated vertices whose current `w(parent) e^{-V}` clears the threshold.
/// Stops when nothing is truncated, the vertex budget is spent or the rounds run
/// out.
pub fn explore_refined(arena: &mut TreeArena, r: f64, limits: &ExploreLimits) -> ExploreReport {
    let mut theta = limits.min_log_hit;
    let mut noop = |_: &TreeArena, _: VertexId, _: bool| {};
    let mut status = grow(arena, VertexId::ROOT, 0.0, r, theta, limits, &mut noop);
    let mut rounds = 0;
    while rounds < limits.refine_rounds && !status.budget_exhausted {
        let front = frontier(arena, r);
        if front.is_empty() || arena.law().is_none() {
            break;
        }
        rounds += 1;
        let mut lw = log_conductances(arena, r, true);
        log_escape_in_place(arena, r, &mut lw);
        theta -= limits.refine_step;
        for t in front {
            let p = arena.parent(t).expect("tree vertex");
            let w = if p == VertexId::BACK_ROOT {
                0.0
            } else {
                lw[p.index()]
            };
            let vt = arena.potential(t);
            if w - vt - climb(limits, r, vt) < theta {
                continue;
            }
            status = grow(arena, t, w, r, theta, limits, &mut noop);
            if status.budget_exhausted {
                break;
            }
        }
    }
    ExploreReport {
        rounds,
        budget_exhausted: status.budget_exhausted,
        vertices: arena.len(),
    }
}

/// Bracket on `gamma_r` from one realized region of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPoint {
    pub r: f64,
    /// Truncated vertices treated as dead ends.
    pub lower: f64,
    /// Truncated vertices treated as absorbing.
    pub upper: f64,
    pub log_lower: f64,
    pub log_upper: f64,
    pub line_size: usize,
    pub truncated: usize,
    pub depth_cap: u32,
}

impl GammaPoint {
    /// Midpoint of the bracket in log-space.
    pub fn log_mid(&self) -> f64 {
        0.5 * (self.log_lower + self.log_upper)
    }

    pub fn is_exact(&self) -> bool {
        self.truncated == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaCurve {
    pub points: Vec<GammaPoint>,
    /// Range of OLS slopes of `ln gamma_r` against `-sqrt(2 r)` over all values
    /// inside the brackets; `None` when the regression is undefined, infinite
    /// ends when a lower bracket end is zero.
    pub slope_min: Option<f64>,
    pub slope_max: Option<f64>,
    /// Slope through the log-midpoints.
    pub slope_mid: Option<f64>,
    pub explore: ExploreReport,
}

fn regressors(points: &[GammaPoint]) -> Option<Vec<f64>> {
    let xs: Vec<f64> = points.iter().map(|p| -(2.0 * p.r).sqrt()).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (xs.len() >= 2 && sxx > 0.0).then(|| xs.iter().map(|x| (x - mean) / sxx).collect())
}

/// The OLS slope is `sum c_i y_i`, so its extremes over the brackets pick each
/// end by the sign of `c_i`.
fn slope_range(points: &[GammaPoint]) -> (Option<f64>, Option<f64>) {
    let Some(c) = regressors(points) else {
        return (None, None);
    };
    let pick = |lowest: bool| {
        c.iter()
            .zip(points)
            .map(|(&ci, p)| {
                let y = if (ci > 0.0) == lowest {
                    p.log_lower
                } else {
                    p.log_upper
                };
                if ci == 0.0 {
                    0.0
                } else {
                    ci * y
                }
            })
            .sum::<f64>()
    };
    (Some(pick(true)), Some(pick(false)))
}

fn slope_mid(points: &[GammaPoint]) -> Option<f64> {
    let c = regressors(points)?;
    let s: f64 = c.iter().zip(points).map(|(ci, p)| ci * p.log_mid()).sum();
    s.is_finite().then_some(s)
}

/// Bracket `gamma_r` at the given levels from a single exploration towards the
/// largest level.
pub fn gamma_r_curve(
    arena: &mut TreeArena,
    rs: &[f64],
    limits: &ExploreLimits,
) -> Result<GammaCurve> {
    if rs.is_empty() || rs.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Usage("levels must be positive and finite".into()));
    }
    if rs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("levels must be strictly increasing".into()));
    }
    let r_max = *rs.last().expect("non-empty");
    let explore = explore_refined(arena, r_max, limits);
    let lazy = arena.law().is_some();
    let mut points = Vec::with_capacity(rs.len());
    for &r in rs {
        let mut line_size = 0usize;
        let mut truncated = 0usize;
        let mut stack = vec![VertexId::ROOT];
        while let Some(x) = stack.pop() {
            if arena.potential(x) >= r {
                line_size += 1;
            } else if let Some(range) = arena.child_range(x) {
                stack.extend(range.map(VertexId));
            } else if lazy {
                truncated += 1;
            }
        }
        let root_prob = |upper: bool| {
            let lg = log_conductances(arena, r, upper);
            log_prob_from_conductance(lg[VertexId::ROOT.index()])
        };
        let log_lower = root_prob(false);
        let log_upper = if truncated == 0 {
            log_lower
        } else {
            root_prob(true)
        };
        points.push(GammaPoint {
            r,
            lower: log_lower.exp(),
            upper: log_upper.exp(),
            log_lower,
            log_upper,
            line_size,
            truncated,
            depth_cap: limits.depth_cap,
        });
    }
    let (slope_min, slope_max) = slope_range(&points);
    Ok(GammaCurve {
        slope_min,
        slope_max,
        slope_mid: slope_mid(&points),
        points,
        explore,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentLaw;
    use crate::quenched::conductance::absorb_prob;

    #[test]
    fn line_is_first_passage() {
        for seed in 0..5 {
            let mut a = TreeArena::new(EnvironmentLaw::two_point(), seed, 0);
            let line = stopping_line(&mut a, 4.0, &ExploreLimits::depth(30)).unwrap();
            check_stopping_line(&a, &line).unwrap();
            for m in &line.members {
                assert!(m.overshoot >= 0.0 && m.overshoot < 2.64);
            }
        }
    }

    #[test]
    fn checker_rejects_bad_lines() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 3, 0);
        let mut line = stopping_line(&mut a, 3.0, &ExploreLimits::depth(40)).unwrap();
        assert!(!line.members.is_empty());
        let good = line.clone();
        line.members.pop();
        assert!(check_stopping_line(&a, &line).is_err());
        let mut line = good.clone();
        let m = line.members[0];
        let p = a.parent(m.vertex).unwrap();
        line.members[0].vertex = p;
        assert!(check_stopping_line(&a, &line).is_err());
        let mut line = good;
        line.members.push(line.members[0]);
        assert!(check_stopping_line(&a, &line).is_err());
    }

    #[test]
    fn exact_curve_matches_absorb_prob() {
        let mut a = TreeArena::new(EnvironmentLaw::fixed_gaussian(2).unwrap(), 5, 1);
        let curve = gamma_r_curve(&mut a, &[1.0, 2.0, 3.0], &ExploreLimits::depth(200)).unwrap();
        for p in &curve.points {
            assert_eq!(p.truncated, 0);
            let mut b = TreeArena::new(EnvironmentLaw::fixed_gaussian(2).unwrap(), 5, 1);
            let line = stopping_line(&mut b, p.r, &ExploreLimits::depth(200)).unwrap();
            let direct = absorb_prob(&b, &line.vertices()).unwrap().prob;
            assert!((direct - p.lower).abs() < 1e-12);
            assert_eq!(line.members.len(), p.line_size);
        }
    }

    #[test]
    fn brackets_are_ordered_and_monotone() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 8, 0);
        let rs: Vec<f64> = (1..=8).map(f64::from).collect();
        let limits = ExploreLimits::depth(12);
        let curve = gamma_r_curve(&mut a, &rs, &limits).unwrap();
        let mut prev = (1.0, 1.0);
        for p in &curve.points {
            assert!(p.lower <= p.upper * (1.0 + 1e-12));
            assert!(p.lower <= prev.0 * (1.0 + 1e-12));
            assert!(p.upper <= prev.1 * (1.0 + 1e-12));
            prev = (p.lower, p.upper);
        }
        let deep = gamma_r_curve(
            &mut TreeArena::new(EnvironmentLaw::two_point(), 8, 0),
            &rs,
            &ExploreLimits::depth(60),
        )
        .unwrap();
        for (p, q) in curve.points.iter().zip(&deep.points) {
            assert!(p.lower <= q.lower * (1.0 + 1e-12) && q.upper <= p.upper * (1.0 + 1e-12));
        }
    }

    #[test]
    fn slope_range_covers_the_exact_slope() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 4, 2);
        let rs = [2.0, 4.0, 6.0, 8.0];
        let exact = gamma_r_curve(&mut a, &rs, &ExploreLimits::depth(100_000)).unwrap();
        let s = exact.slope_mid.unwrap();
        assert!((exact.slope_min.unwrap() - s).abs() < 1e-12);
        assert!((exact.slope_max.unwrap() - s).abs() < 1e-12);
        let xs: Vec<f64> = rs.iter().map(|r| -(2.0 * r).sqrt()).collect();
        let ys: Vec<f64> = exact.points.iter().map(|p| p.log_lower).collect();
        assert!((crate::estimate::ols(&xs, &ys).unwrap().0 - s).abs() < 1e-12);
        let mut b = TreeArena::new(EnvironmentLaw::two_point(), 4, 2);
        let rough = gamma_r_curve(&mut b, &rs, &ExploreLimits::depth(6)).unwrap();
        assert!(rough.slope_min.unwrap() <= s + 1e-12 && s <= rough.slope_max.unwrap() + 1e-12);
    }

    #[test]
    fn extinct_tree_has_empty_line() {
        let mut a = TreeArena::frozen();
        a.set_children(VertexId::ROOT, &[-1.0]).unwrap();
        let line = stopping_line(&mut a, 2.0, &ExploreLimits::depth(10)).unwrap();
        assert!(line.extinct && line.members.is_empty());
        let c = gamma_r_curve(&mut a, &[2.0], &ExploreLimits::depth(10)).unwrap();
        assert_eq!(c.points[0].upper, 0.0);
    }
}
