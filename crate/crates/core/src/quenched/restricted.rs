//! The restricted line `H_r^*` and the quenched first moment of `Z_r`.

use std::collections::HashSet;

use serde::Serialize;

use super::line::{stopping_line, ExploreLimits, StoppingLine};
use super::paths::log_path_sum;
use crate::environment::{TreeArena, VertexId};
use crate::error::{Error, Result};
use crate::walk::{count_hits, HitCounts, Visit};

/// Ladder levels and thresholds that define `H_r^*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderGrid {
    pub r: f64,
    pub chi: f64,
    pub theta: f64,
    pub eps: f64,
    pub eps1: f64,
    pub beta: f64,
    /// Number of ladder blocks, `floor(r^{1-chi})`.
    pub k: u32,
}

impl LadderGrid {
    pub fn new(r: f64, chi: f64, theta: f64, eps: f64, eps1: f64, beta: f64) -> Result<Self> {
        if !(0.5 < theta && theta < chi && chi < 1.0) {
            return Err(Error::Usage(format!(
                "need 1/2 < theta < chi < 1, got theta = {theta}, chi = {chi}"
            )));
        }
        if !(eps > 0.0 && eps1 > 0.0 && beta >= 0.0 && r > 0.0) {
            return Err(Error::Usage(
                "need eps > 0, eps1 > 0, beta >= 0, r > 0".into(),
            ));
        }
        let k = r.powf(1.0 - chi).floor();
        if k < 1.0 {
            return Err(Error::Usage(format!("r = {r} gives no ladder block")));
        }
        Ok(Self {
            r,
            chi,
            theta,
            eps,
            eps1,
            beta,
            k: k as u32,
        })
    }

    /// `h_m = r m / k`.
    pub fn level(&self, m: u32) -> f64 {
        self.r * f64::from(m) / f64::from(self.k)
    }

    /// `lambda_m = sqrt(2r) * sqrt((k - m + 1) / k)`, for `1 <= m <= k`.
    pub fn corridor(&self, m: u32) -> f64 {
        let k = f64::from(self.k);
        (2.0 * self.r).sqrt() * ((k - f64::from(m) + 1.0) / k).sqrt()
    }

    pub fn overshoot_cap(&self) -> f64 {
        self.r.powf(self.theta)
    }

    /// Members must satisfy `|x| <` this bound.
    pub fn depth_bound(&self) -> u64 {
        (self.eps1 * self.r.sqrt()).exp().floor() as u64
    }

    pub fn lambda_cap(&self) -> f64 {
        (self.eps * self.r.sqrt()).exp()
    }
}

/// Which defining condition of `H_r^*` a member of `H_r` fails first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rejection {
    Overshoot,
    LowMinimum,
    TooDeep,
    Corridor,
    Branching,
}

/// Apply the `H_r^*` conditions to a member of `H_r` whose ancestors are expanded.
pub fn classify(arena: &TreeArena, grid: &LadderGrid, x: VertexId) -> Option<Rejection> {
    let path = arena.path(x);
    let n = path.len() - 1;
    let v: Vec<f64> = path.iter().map(|&u| arena.potential(u)).collect();
    let first_at = |s: f64| v.iter().position(|&w| w >= s).unwrap_or(n);
    // hitting indices H_{h_m} along the path, m = 0..=k
    let hits: Vec<usize> = (0..=grid.k)
        .map(|m| {
            if m == grid.k {
                n
            } else {
                first_at(grid.level(m))
            }
        })
        .collect();
    let cap = grid.overshoot_cap();
    for &i in &hits[1..grid.k as usize] {
        if v[i] - v[i - 1] > cap {
            return Some(Rejection::Overshoot);
        }
    }
    if v.iter().copied().fold(f64::INFINITY, f64::min) < -grid.beta {
        return Some(Rejection::LowMinimum);
    }
    if n as u64 >= grid.depth_bound() {
        return Some(Rejection::TooDeep);
    }
    let mut running_max = f64::NEG_INFINITY;
    let mut m = 1usize;
    for j in 0..n {
        while m < grid.k as usize && j >= hits[m] {
            m += 1;
        }
        running_max = running_max.max(v[j]);
        if running_max - v[j] > grid.corridor(m as u32) {
            return Some(Rejection::Corridor);
        }
    }
    let lcap = grid.lambda_cap();
    if path[..n]
        .iter()
        .any(|&u| arena.record(u).lambda().is_none_or(|l| l > lcap))
    {
        return Some(Rejection::Branching);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictedLine {
    pub grid: LadderGrid,
    pub line: StoppingLine,
    pub members: Vec<VertexId>,
    pub rejections: Vec<(VertexId, Rejection)>,
    /// `E_omega Z_r = sum_{x in H_r^*} P(T_x < T_{BACK_ROOT})`.
    pub first_moment: f64,
    /// No vertex that could still lead to a member of `H_r^*` was left unexplored.
    pub exact: bool,
}

/// Realize `H_r` down to the depth bound of `grid` and filter it to `H_r^*`.
///
/// Members of `H_r^*` lie strictly above the depth bound, so exploring that far
/// makes `H_r^*` exact even when `H_r` itself is truncated. A smaller depth cap
/// in `limits` gives a lower bound, flagged by `exact == false`.
pub fn restricted_line(
    arena: &mut TreeArena,
    grid: &LadderGrid,
    limits: &ExploreLimits,
) -> Result<RestrictedLine> {
    let bound = grid.depth_bound();
    if bound == 0 {
        return Err(Error::Usage("depth bound is zero".into()));
    }
    let mut lim = *limits;
    lim.depth_cap = lim
        .depth_cap
        .min((bound - 1).min(u64::from(u32::MAX)) as u32);
    let line = stopping_line(arena, grid.r, &lim)?;
    let exact = line
        .truncated
        .iter()
        .all(|&t| u64::from(arena.depth(t)) + 1 >= bound);
    let mut members = Vec::new();
    let mut rejections = Vec::new();
    let mut first_moment = 0.0;
    for m in &line.members {
        match classify(arena, grid, m.vertex) {
            None => {
                members.push(m.vertex);
                first_moment += (-log_path_sum(arena, m.vertex)).exp();
            }
            Some(why) => rejections.push((m.vertex, why)),
        }
    }
    Ok(RestrictedLine {
        grid: grid.clone(),
        line,
        members,
        rejections,
        first_moment,
        exact,
    })
}

impl RestrictedLine {
    /// Simulate `Z_r`, the number of members hit, over `excursions` excursions.
    ///
    /// Members have `V < r` and `V >= -beta` strictly above them and lie no
    /// deeper than the deepest member, so the walk reflects off every vertex
    /// outside that region without changing the law of the hit set.
    pub fn count_visits(
        &self,
        arena: &mut TreeArena,
        excursions: u64,
        seed: u64,
        step_cap: u64,
    ) -> HitCounts {
        let members: HashSet<VertexId> = self.members.iter().copied().collect();
        let max_depth = self
            .members
            .iter()
            .map(|&x| arena.depth(x))
            .max()
            .unwrap_or(0);
        let (r, beta) = (self.grid.r, self.grid.beta);
        count_hits(arena, excursions, seed, step_cap, false, |a, y| {
            if members.contains(&y) {
                Visit::HitReflect
            } else if a.potential(y) >= r || a.potential(y) < -beta || a.depth(y) >= max_depth {
                Visit::Reflect
            } else {
                Visit::Pass
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r: f64) -> LadderGrid {
        LadderGrid::new(r, 0.8, 0.6, 0.5, 1.5, 1.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(LadderGrid::new(10.0, 0.6, 0.7, 0.5, 0.1, 1.0).is_err());
        assert!(LadderGrid::new(10.0, 0.8, 0.6, 0.0, 0.1, 1.0).is_err());
        assert!(LadderGrid::new(0.5, 0.8, 0.6, 0.5, 0.1, 1.0).is_err());
        let g = grid(40.0);
        assert_eq!(g.k, 2);
        assert!((g.corridor(1) - 80f64.sqrt()).abs() < 1e-12);
        assert!((g.corridor(2) - 40f64.sqrt()).abs() < 1e-12);
        assert_eq!(g.level(1), 20.0);
        assert_eq!(g.level(2), 40.0);
    }

    /// Chain built from displacements, with an optional heavy side branch on
    /// the root to inflate `Lambda`.
    fn chain(dvs: &[f64], side: Option<f64>) -> (TreeArena, VertexId) {
        let mut a = TreeArena::frozen();
        let mut x = VertexId::ROOT;
        for (i, &dv) in dvs.iter().enumerate() {
            let kids: Vec<f64> = match (i, side) {
                (0, Some(s)) => vec![dv, s],
                _ => vec![dv],
            };
            x = VertexId(a.set_children(x, &kids).unwrap().start);
        }
        a.set_children(x, &[]).unwrap();
        (a, x)
    }

    #[test]
    fn hand_built_cases() {
        // r = 40: k = 2, h_1 = 20, corridors 8.94 then 6.32, overshoot cap 9.15
        let g = grid(40.0);
        let ok = [12.0, 9.0, 21.0];
        let (a, x) = chain(&ok, None);
        assert_eq!(classify(&a, &g, x), None);
        let (a, x) = chain(&[12.0, 10.0, 20.0], None);
        assert_eq!(classify(&a, &g, x), Some(Rejection::Overshoot));
        let (a, x) = chain(&[-2.0, 14.0, 9.0, 21.0], None);
        assert_eq!(classify(&a, &g, x), Some(Rejection::LowMinimum));
        // drawdown 7 is allowed before h_1 but not after; the step down makes
        // Lambda = e^7, so the branching cap is relaxed for this case
        let wide = LadderGrid::new(40.0, 0.8, 0.6, 1.2, 1.5, 1.0).unwrap();
        let (a, x) = chain(&[12.0, -7.0, 6.0, 9.0, 22.0], None);
        assert_eq!(classify(&a, &wide, x), None);
        assert_eq!(classify(&a, &g, x), Some(Rejection::Branching));
        let (a, x) = chain(&[12.0, 9.0, -7.0, 26.0], None);
        assert_eq!(classify(&a, &wide, x), Some(Rejection::Corridor));
        let (a, x) = chain(&[12.0, -9.5, 9.0, 8.5, 20.0], None);
        assert_eq!(classify(&a, &g, x), Some(Rejection::Corridor));
        // Lambda(root) = e^{-12} + e^{-side} against the cap e^{3.16}
        let (a, x) = chain(&ok, Some(-3.5));
        assert_eq!(classify(&a, &g, x), Some(Rejection::Branching));
        let (a, x) = chain(&ok, Some(-3.0));
        assert_eq!(classify(&a, &g, x), None);
        let tight = LadderGrid::new(40.0, 0.8, 0.6, 0.5, 0.2, 1.0).unwrap();
        assert_eq!(tight.depth_bound(), 3);
        assert_eq!(classify(&a, &tight, x), Some(Rejection::TooDeep));
    }

    #[test]
    fn first_moment_sums_hitting_probabilities() {
        let g = grid(40.0);
        let (mut a, x) = chain(&[12.0, 9.0, 21.0], None);
        let rl = restricted_line(&mut a, &g, &ExploreLimits::depth(50)).unwrap();
        assert_eq!(rl.members, vec![x]);
        assert!(rl.exact);
        let want = 1.0 / (1.0 + 12f64.exp() + 21f64.exp() + 42f64.exp());
        assert!((rl.first_moment / want - 1.0).abs() < 1e-12);
    }
}
