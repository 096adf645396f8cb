//! Embedded Galton-Watson tree built from length-`L` blocks and its comparison
//! with the set `K_s` of well-behaved first-passage vertices.

use serde::Serialize;

use crate::environment::{TreeArena, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockParams {
    pub block_len: u32,
    pub alpha: f64,
    pub c4: f64,
}

impl BlockParams {
    pub fn new(block_len: u32, alpha: f64, c4: f64) -> Result<Self> {
        if block_len == 0 || !(0.0 < alpha && alpha < 0.5) || c4 <= 0.0 {
            return Err(Error::Usage(
                "need block length >= 1, 0 < alpha < 1/2 and c4 > 0".into(),
            ));
        }
        Ok(Self {
            block_len,
            alpha,
            c4,
        })
    }

    /// `L^alpha`.
    pub fn gain(&self) -> f64 {
        f64::from(self.block_len).powf(self.alpha)
    }
}

/// Block children of `y`: descendants `x` at relative depth `L` with
/// `V(x) - V(y) >= L^alpha`, running relative maximum below `2 L^alpha` and
/// `prod (1 + Lambda)` over the block (from `y` to the parent of `x`) at most
/// `e^{c4 L}`.
pub fn block_children(arena: &mut TreeArena, y: VertexId, p: &BlockParams) -> Vec<VertexId> {
    let gain = p.gain();
    let log_cap = p.c4 * f64::from(p.block_len);
    let base_v = arena.potential(y);
    let base_d = arena.depth(y);
    let mut out = Vec::new();
    // (vertex, log prod of (1 + Lambda) over strict ancestors within the block)
    let mut stack = vec![(y, 0.0f64)];
    while let Some((z, log_prod)) = stack.pop() {
        let rel_depth = arena.depth(z) - base_d;
        if rel_depth == p.block_len {
            if arena.potential(z) - base_v >= gain {
                out.push(z);
            }
            continue;
        }
        let range = arena.expand(z);
        let lam = arena.record(z).lambda().unwrap_or(0.0);
        let next = log_prod + lam.ln_1p();
        if next > log_cap {
            continue;
        }
        for c in range.rev() {
            let c = VertexId(c);
            if arena.potential(c) - base_v < 2.0 * gain {
                stack.push((c, next));
            }
        }
    }
    out
}

/// Generations `G_0 = {root}, G_1, ..., G_n` of the embedded tree.
pub fn embedded_generations(arena: &mut TreeArena, p: &BlockParams, n: u32) -> Vec<Vec<VertexId>> {
    let mut gens = vec![vec![VertexId::ROOT]];
    for _ in 0..n {
        let prev = gens.last().expect("non-empty");
        let mut next = Vec::new();
        for &y in prev.clone().iter() {
            next.extend(block_children(arena, y, p));
        }
        gens.push(next);
    }
    gens
}

/// `#K_s`: members `x` of `H_s` with `prod_{j < |x|} (1 + Lambda(x_j)) <=
/// e^{2 c4 L^{1-alpha} s}`, `|x| <= 2 L^{1-alpha} s` and `V(x) <= 4 s`.
pub fn count_k(arena: &mut TreeArena, p: &BlockParams, s: f64, max_vertices: usize) -> Result<u64> {
    let scale = 2.0 * f64::from(p.block_len).powf(1.0 - p.alpha) * s;
    let log_cap = p.c4 * scale;
    let depth_cap = scale.floor() as u32;
    let mut count = 0u64;
    let mut stack = vec![(VertexId::ROOT, 0.0f64)];
    while let Some((z, log_prod)) = stack.pop() {
        let v = arena.potential(z);
        if v >= s {
            if v <= 4.0 * s {
                count += 1;
            }
            continue;
        }
        if arena.depth(z) >= depth_cap {
            continue;
        }
        if arena.len() > max_vertices {
            return Err(Error::Budget(format!(
                "K_s census exceeded {max_vertices} vertices"
            )));
        }
        let range = arena.expand(z);
        let next = log_prod + arena.record(z).lambda().unwrap_or(0.0).ln_1p();
        if next > log_cap {
            continue;
        }
        stack.extend(range.map(|c| (VertexId(c), next)));
    }
    Ok(count)
}

/// One tested pair `(n, s)` of the inclusion `#K_s >= #{y in G_n with a
/// descendant in G_{2n+2}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionCheck {
    pub n: u32,
    pub s: f64,
    pub k_count: u64,
    pub rhs: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    pub params: BlockParams,
    pub generation_sizes: Vec<usize>,
    pub checks: Vec<InclusionCheck>,
}

impl Census {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Build `G^{(L)}` up to generation `2 n_max + 2` and test the inclusion at
/// `s = 2 n L^alpha`, the midpoint and `2 (n+1) L^alpha` for `n = 1..=n_max`.
pub fn embedded_tree_census(
    arena: &mut TreeArena,
    p: &BlockParams,
    n_max: u32,
    max_vertices: usize,
) -> Result<Census> {
    let gens = embedded_generations(arena, p, 2 * n_max + 2);
    let gain = p.gain();
    let mut checks = Vec::new();
    for n in 1..=n_max {
        let deep = &gens[(2 * n + 2) as usize];
        let depth_n = n * p.block_len;
        let mut ancestors: Vec<VertexId> = deep
            .iter()
            .map(|&z| {
                let mut u = z;
                while arena.depth(u) > depth_n {
                    u = arena.parent(u).expect("tree vertex");
                }
                u
            })
            .collect();
        ancestors.sort();
        ancestors.dedup();
        let rhs = ancestors.len() as u64;
        for frac in [0.0, 0.5, 1.0] {
            let s = 2.0 * (f64::from(n) + frac) * gain;
            let k_count = count_k(arena, p, s, max_vertices)?;
            checks.push(InclusionCheck {
                n,
                s,
                k_count,
                rhs,
                holds: k_count >= rhs,
            });
        }
    }
    Ok(Census {
        params: *p,
        generation_sizes: gens.iter().map(Vec::len).collect(),
        checks,
    })
}
