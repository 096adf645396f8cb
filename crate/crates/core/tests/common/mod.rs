#![allow(dead_code)]

use gwlab::environment::{EnvironmentLaw, TreeArena, VertexId};

/// The laws used for randomized structural tests.
pub fn law_for(i: u64) -> EnvironmentLaw {
    match i % 4 {
        0 => EnvironmentLaw::two_point(),
        1 => EnvironmentLaw::fixed_gaussian(2).unwrap(),
        2 => EnvironmentLaw::fixed_gaussian(3).unwrap(),
        _ => EnvironmentLaw::poisson_gaussian(1.7).unwrap(),
    }
}

/// Breadth-first realization of a random tree with at most `max_vertices`
/// tree vertices, frozen so that unexpanded vertices become leaves.
pub fn small_frozen_tree(law: EnvironmentLaw, seed: u64, max_vertices: usize) -> TreeArena {
    let mut a = TreeArena::new(law, seed, 0);
    let mut queue = std::collections::VecDeque::from([VertexId::ROOT]);
    while let Some(x) = queue.pop_front() {
        // the arena holds BACK_ROOT as well
        let room = max_vertices + 1 - a.len();
        let mut probe = a.clone();
        let n = probe.expand(x).len();
        if n > room {
            break;
        }
        queue.extend(a.expand(x).map(VertexId));
    }
    TreeArena::from_dump(&a.dump()).unwrap().0
}

/// Dense Dirichlet solve of `h = P h` with `h = 1` on `absorbing` and
/// `h(BACK_ROOT) = 0`, by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn dense_absorb(a: &TreeArena, absorbing: &[VertexId]) -> f64 {
    let n = a.len();
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for i in 0..n {
        let x = VertexId(i as u32);
        m[i][i] = 1.0;
        if x == VertexId::BACK_ROOT {
            continue;
        }
        if absorbing.contains(&x) {
            m[i][n] = 1.0;
            continue;
        }
        let t = a.transition_probs(x).unwrap();
        let p = a.parent(x).unwrap();
        m[i][p.index()] -= t.to_parent;
        for (c, q) in t.to_children {
            m[i][c.index()] -= q;
        }
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for k in col..=n {
            m[col][k] /= d;
        }
        for i in 0..n {
            if i != col && m[i][col] != 0.0 {
                let f = m[i][col];
                for k in col..=n {
                    m[i][k] -= f * m[col][k];
                }
            }
        }
    }
    m[VertexId::ROOT.index()][n]
}

/// A random antichain: each vertex joins with probability 1/3 unless an
/// ancestor already did.
pub fn random_antichain(a: &TreeArena, seed: u64) -> Vec<VertexId> {
    let mut out = Vec::new();
    let mut stack = vec![VertexId::ROOT];
    let mut s = seed;
    while let Some(x) = stack.pop() {
        s = gwlab::rng::mix64(s);
        if x != VertexId::ROOT && s.is_multiple_of(3) {
            out.push(x);
        } else {
            stack.extend(a.children(x));
        }
    }
    out
}
