//! Effective-conductance recursion for absorption probabilities.
//!
//! Edge `(parent(x), x)` carries conductance `e^{-V(x)}` and the edge from
//! `BACK_ROOT` to the root carries conductance 1, which reproduces the walk's
//! transition ratios `e^{-dV}`. With `g(v)` the effective conductance from `v`
//! down to the absorbing set inside the subtree of `v`,
//! `g(v) = sum_children (1/c(child) + 1/g(child))^{-1}` and the absorption
//! probability from the root is `g(root) / (g(root) + 1)`. Everything is carried
//! in log-space.

use std::collections::HashSet;

use crate::environment::{TreeArena, VertexId};
use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, LogSumExp};

/// How the recursion treats a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Member of the absorbing set: `g = inf`.
    Absorbing,
    /// Recurse into the realized children.
    Open,
    /// Contributes nothing: `g = 0`.
    Dead,
}

/// `ln g(root)` under the roles assigned by `role`.
pub fn log_root_conductance<F>(arena: &TreeArena, role: F) -> f64
where
    F: Fn(&TreeArena, VertexId) -> Role,
{
    match role(arena, VertexId::ROOT) {
        Role::Absorbing => f64::INFINITY,
        Role::Dead => f64::NEG_INFINITY,
        Role::Open => log_subtree_conductance(arena, VertexId::ROOT, &role),
    }
}

/// `ln g(v)` for an `Open` vertex `v`.
fn log_subtree_conductance<F>(arena: &TreeArena, top: VertexId, role: &F) -> f64
where
    F: Fn(&TreeArena, VertexId) -> Role,
{
    struct Frame {
        v: VertexId,
        next: u32,
        end: u32,
        acc: LogSumExp,
    }
    let frame = |v: VertexId| {
        let r = arena.child_range(v).unwrap_or(0..0);
        Frame {
            v,
            next: r.start,
            end: r.end,
            acc: LogSumExp::new(),
        }
    };
    let mut stack = vec![frame(top)];
    loop {
        let top_frame = stack.last_mut().expect("non-empty stack");
        if top_frame.next < top_frame.end {
            let c = VertexId(top_frame.next);
            top_frame.next += 1;
            match role(arena, c) {
                Role::Absorbing => top_frame.acc.push(-arena.potential(c)),
                Role::Dead => {}
                Role::Open => stack.push(frame(c)),
            }
            continue;
        }
        let done = stack.pop().expect("non-empty stack");
        let lg = done.acc.value();
        match stack.last_mut() {
            None => return lg,
            Some(parent) => {
                if lg > f64::NEG_INFINITY {
                    // series: 1/c + 1/g with c = e^{-V}
                    let term = -log_add_exp(arena.potential(done.v), -lg);
                    parent.acc.push(term);
                }
            }
        }
    }
}

/// `ln P(absorbed before BACK_ROOT)` from the root conductance `ln g`.
pub fn log_prob_from_conductance(lg: f64) -> f64 {
    if lg == f64::INFINITY {
        0.0
    } else {
        -log_add_exp(0.0, -lg)
    }
}

/// Absorption probability with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorption {
    pub prob: f64,
    pub log_prob: f64,
}

impl Absorption {
    fn from_log(lp: f64) -> Self {
        Self {
            prob: lp.exp(),
            log_prob: lp,
        }
    }
}

/// `P(T_A < T_{BACK_ROOT})` for the walk started at the root, `A` an antichain of
/// realized vertices.
pub fn absorb_prob(arena: &TreeArena, absorbing: &[VertexId]) -> Result<Absorption> {
    let members: HashSet<VertexId> = absorbing.iter().copied().collect();
    let mut spine: HashSet<VertexId> = HashSet::new();
    for &x in absorbing {
        if !arena.contains(x) || x == VertexId::BACK_ROOT {
            return Err(Error::Usage(format!("vertex {} is not realized", x.0)));
        }
        let mut cur = arena.parent(x);
        while let Some(p) = cur {
            if p == VertexId::BACK_ROOT {
                break;
            }
            if members.contains(&p) {
                return Err(Error::Usage(format!(
                    "absorbing set is not an antichain: {} is an ancestor of {}",
                    p.0, x.0
                )));
            }
            if !spine.insert(p) {
                break;
            }
            cur = arena.parent(p);
        }
    }
    let lg = log_root_conductance(arena, |_, v| {
        if members.contains(&v) {
            Role::Absorbing
        } else if spine.contains(&v) {
            Role::Open
        } else {
            Role::Dead
        }
    });
    Ok(Absorption::from_log(log_prob_from_conductance(lg)))
}

/// Level set `{x : |x| = n}` of the realized tree (vertices already realized).
pub fn level_slice(arena: &TreeArena, n: u32) -> Vec<VertexId> {
    (1..arena.len() as u32)
        .map(VertexId)
        .filter(|&v| arena.depth(v) == n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentLaw;
    use crate::quenched::paths::hit_prob_vertex;

    #[test]
    fn bare_path_matches_path_formula() {
        let mut a = TreeArena::frozen();
        let mut x = VertexId::ROOT;
        for dv in [0.7, -1.2, 2.5, 0.1] {
            x = VertexId(a.set_children(x, &[dv]).unwrap().start);
        }
        let got = absorb_prob(&a, &[x]).unwrap().prob;
        assert!((got - hit_prob_vertex(&a, x).unwrap()).abs() < 1e-12);
        assert_eq!(absorb_prob(&a, &[VertexId::ROOT]).unwrap().prob, 1.0);
    }

    #[test]
    fn non_antichain_rejected() {
        let mut a = TreeArena::frozen();
        let c = VertexId(a.set_children(VertexId::ROOT, &[0.0]).unwrap().start);
        assert!(matches!(
            absorb_prob(&a, &[VertexId::ROOT, c]),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            absorb_prob(&a, &[VertexId(99)]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn level_sets_are_monotone() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 21, 0);
        a.expand_to_depth(7);
        let mut prev = 1.0;
        for n in 1..=7 {
            let p = absorb_prob(&a, &level_slice(&a, n)).unwrap().prob;
            assert!(p <= prev + 1e-15);
            prev = p;
        }
    }
}
