//! Hitting probabilities of single vertices along their ancestral path.

use crate::environment::{TreeArena, VertexId};
use crate::error::{Error, Result};
use crate::logspace::LogSumExp;

/// `ln sum_{u in [root, x]} e^{V(u)}`.
pub fn log_path_sum(arena: &TreeArena, x: VertexId) -> f64 {
    let mut acc = LogSumExp::new();
    let mut cur = x;
    loop {
        acc.push(arena.potential(cur));
        match arena.parent(cur) {
            Some(p) if p != VertexId::BACK_ROOT => cur = p,
            _ => break,
        }
    }
    acc.value()
}

fn check_tree_vertex(arena: &TreeArena, x: VertexId) -> Result<()> {
    if !arena.contains(x) || x == VertexId::BACK_ROOT {
        return Err(Error::Usage(format!(
            "vertex {} is not a realized tree vertex",
            x.0
        )));
    }
    Ok(())
}

/// `ln P(T_x < T_{BACK_ROOT})` for the walk started at the root.
pub fn log_hit_prob_vertex(arena: &TreeArena, x: VertexId) -> Result<f64> {
    check_tree_vertex(arena, x)?;
    Ok(-log_path_sum(arena, x))
}

/// `P(T_x < T_{BACK_ROOT}) = 1 / sum_{u in [root, x]} e^{V(u)}`.
pub fn hit_prob_vertex(arena: &TreeArena, x: VertexId) -> Result<f64> {
    log_hit_prob_vertex(arena, x).map(f64::exp)
}

/// Probability that the walk started at `y` hits `x` before `BACK_ROOT`, for `y`
/// an ancestor of `x` (or `x` itself): a ratio of path sums.
pub fn hit_prob_from(arena: &TreeArena, y: VertexId, x: VertexId) -> Result<f64> {
    check_tree_vertex(arena, x)?;
    check_tree_vertex(arena, y)?;
    if !arena.is_ancestor_or_self(y, x) {
        return Err(Error::Usage(format!(
            "vertex {} is not on the path from the root to {}",
            y.0, x.0
        )));
    }
    Ok((log_path_sum(arena, y) - log_path_sum(arena, x))
        .min(0.0)
        .exp())
}
