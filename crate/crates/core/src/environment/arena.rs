//! Lazily realized environment: the Galton-Watson tree with its potential.

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::environment::law::EnvironmentLaw;
use crate::error::{Error, Result};
use crate::rng;

/// Handle of a vertex in a [`TreeArena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    /// The reflecting parent of the root.
    pub const BACK_ROOT: VertexId = VertexId(0);
    /// The root of the tree.
    pub const ROOT: VertexId = VertexId(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NO_PARENT: u32 = u32::MAX;
const UNEXPANDED: u32 = u32::MAX;

/// One realized vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexRecord {
    parent: u32,
    first_child: u32,
    n_children: u32,
    depth: u32,
    v: f64,
    dv: f64,
    /// `sum over children of e^{-dV(child)}`; NaN until expanded.
    lambda: f64,
    key: u64,
}

impl VertexRecord {
    pub fn parent(&self) -> Option<VertexId> {
        (self.parent != NO_PARENT).then_some(VertexId(self.parent))
    }

    pub fn potential(&self) -> f64 {
        self.v
    }

    pub fn displacement(&self) -> f64 {
        self.dv
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_expanded(&self) -> bool {
        self.n_children != UNEXPANDED
    }

    pub fn lambda(&self) -> Option<f64> {
        self.is_expanded().then_some(self.lambda)
    }

    pub fn children(&self) -> Option<impl ExactSizeIterator<Item = VertexId> + Clone> {
        self.is_expanded()
            .then(|| (self.first_child..self.first_child + self.n_children).map(VertexId))
    }
}

/// Transition probabilities out of an expanded vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    pub to_parent: f64,
    pub to_children: Vec<(VertexId, f64)>,
}

/// Indexed store of realized vertices.
///
/// Children of a vertex are sampled exactly once, from a random stream keyed by
/// the vertex's genealogical label, so the realized tree does not depend on the
/// order in which vertices are expanded.
#[derive(Debug, Clone)]
pub struct TreeArena {
    law: Option<EnvironmentLaw>,
    vertices: Vec<VertexRecord>,
    generation_sizes: Vec<u64>,
    scratch: Vec<f64>,
    seed: u64,
    replica: u64,
}

impl TreeArena {
    /// Fresh arena holding `BACK_ROOT` and an unexpanded root.
    pub fn new(law: EnvironmentLaw, seed: u64, replica: u64) -> Self {
        let root_key = rng::key(&[seed, replica, rng::purpose::ENVIRONMENT]);
        Self::with_root(Some(law), root_key, seed, replica)
    }

    /// Arena without a law: every vertex not given children explicitly is a leaf.
    pub fn frozen() -> Self {
        Self::with_root(None, 0, 0, 0)
    }

    fn with_root(law: Option<EnvironmentLaw>, root_key: u64, seed: u64, replica: u64) -> Self {
        let back = VertexRecord {
            parent: NO_PARENT,
            first_child: VertexId::ROOT.0,
            n_children: 1,
            depth: 0,
            v: 0.0,
            dv: 0.0,
            lambda: 1.0,
            key: 0,
        };
        let root = VertexRecord {
            parent: VertexId::BACK_ROOT.0,
            first_child: 0,
            n_children: UNEXPANDED,
            depth: 0,
            v: 0.0,
            dv: 0.0,
            lambda: f64::NAN,
            key: root_key,
        };
        Self {
            law,
            vertices: vec![back, root],
            generation_sizes: vec![1],
            scratch: Vec::new(),
            seed,
            replica,
        }
    }

    pub fn law(&self) -> Option<&EnvironmentLaw> {
        self.law.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    /// Number of realized vertices, including `BACK_ROOT`.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Realized vertex count per generation.
    pub fn generation_sizes(&self) -> &[u64] {
        &self.generation_sizes
    }

    pub fn contains(&self, x: VertexId) -> bool {
        x.index() < self.vertices.len()
    }

    #[inline]
    pub fn record(&self, x: VertexId) -> &VertexRecord {
        &self.vertices[x.index()]
    }

    #[inline]
    pub fn potential(&self, x: VertexId) -> f64 {
        self.vertices[x.index()].v
    }

    #[inline]
    pub fn depth(&self, x: VertexId) -> u32 {
        self.vertices[x.index()].depth
    }

    #[inline]
    pub fn parent(&self, x: VertexId) -> Option<VertexId> {
        self.vertices[x.index()].parent()
    }

    #[inline]
    pub fn is_expanded(&self, x: VertexId) -> bool {
        self.vertices[x.index()].is_expanded()
    }

    /// Children of an expanded vertex as an index range.
    #[inline]
    pub fn child_range(&self, x: VertexId) -> Option<Range<u32>> {
        let r = &self.vertices[x.index()];
        r.is_expanded()
            .then(|| r.first_child..r.first_child + r.n_children)
    }

    /// Children of an expanded vertex; empty for unexpanded ones.
    pub fn children(&self, x: VertexId) -> impl ExactSizeIterator<Item = VertexId> + Clone {
        self.child_range(x).unwrap_or(0..0).map(VertexId)
    }

    /// Expand `x` if needed and return its children.
    ///
    /// Re-expanding never resamples: the second call returns the same handles.
    pub fn expand(&mut self, x: VertexId) -> Range<u32> {
        if let Some(r) = self.child_range(x) {
            return r;
        }
        let rec = self.vertices[x.index()];
        let mut dvs = std::mem::take(&mut self.scratch);
        dvs.clear();
        if let Some(law) = self.law {
            let mut stream = rng::from_key(rec.key);
            law.sample_children(&mut stream, &mut dvs);
        }
        let range = self.install_children(x, &dvs);
        self.scratch = dvs;
        range
    }

    /// Give an unexpanded vertex explicit children with displacements `dvs`.
    pub fn set_children(&mut self, x: VertexId, dvs: &[f64]) -> Result<Range<u32>> {
        if !self.contains(x) {
            return Err(Error::Usage(format!("vertex {} not in arena", x.0)));
        }
        if self.is_expanded(x) {
            return Err(Error::Usage(format!("vertex {} already expanded", x.0)));
        }
        Ok(self.install_children(x, dvs))
    }

    fn install_children(&mut self, x: VertexId, dvs: &[f64]) -> Range<u32> {
        let first = self.vertices.len() as u32;
        let parent = self.vertices[x.index()];
        let depth = parent.depth + 1;
        let mut lambda = 0.0;
        for (i, &dv) in dvs.iter().enumerate() {
            lambda += (-dv).exp();
            self.vertices.push(VertexRecord {
                parent: x.0,
                first_child: 0,
                n_children: UNEXPANDED,
                depth,
                v: parent.v + dv,
                dv,
                lambda: f64::NAN,
                key: rng::child_key(parent.key, i as u64),
            });
        }
        if self.generation_sizes.len() <= depth as usize {
            self.generation_sizes.resize(depth as usize + 1, 0);
        }
        self.generation_sizes[depth as usize] += dvs.len() as u64;
        let rec = &mut self.vertices[x.index()];
        rec.first_child = first;
        rec.n_children = dvs.len() as u32;
        rec.lambda = lambda;
        first..first + dvs.len() as u32
    }

    /// Transition probabilities of the walk at an expanded vertex.
    ///
    /// `p(parent) = 1/(1+Lambda)` and `p(child y) = e^{-dV(y)}/(1+Lambda)`; at
    /// `BACK_ROOT` the only move is to the root.
    pub fn transition_probs(&self, x: VertexId) -> Result<Transitions> {
        if !self.contains(x) {
            return Err(Error::Usage(format!("vertex {} not in arena", x.0)));
        }
        if x == VertexId::BACK_ROOT {
            return Ok(Transitions {
                to_parent: 0.0,
                to_children: vec![(VertexId::ROOT, 1.0)],
            });
        }
        let rec = self.record(x);
        if !rec.is_expanded() {
            return Err(Error::Usage(format!(
                "transition probabilities need an expanded vertex; {} is not",
                x.0
            )));
        }
        let z = 1.0 + rec.lambda;
        let to_children = self
            .children(x)
            .map(|c| (c, (-self.record(c).dv).exp() / z))
            .collect();
        Ok(Transitions {
            to_parent: 1.0 / z,
            to_children,
        })
    }

    /// Ancestral path `[root, ..., x]`.
    pub fn path(&self, x: VertexId) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.depth(x) as usize + 1);
        let mut cur = Some(x);
        while let Some(c) = cur {
            if c == VertexId::BACK_ROOT {
                break;
            }
            out.push(c);
            cur = self.parent(c);
        }
        out.reverse();
        out
    }

    /// True if `y` lies on the path from the root to `x` (including `x` itself).
    pub fn is_ancestor_or_self(&self, y: VertexId, x: VertexId) -> bool {
        if y == VertexId::BACK_ROOT || x == VertexId::BACK_ROOT {
            return y == x;
        }
        let target = self.depth(y);
        let mut cur = x;
        while self.depth(cur) > target {
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        cur == y
    }

    /// Expand every vertex down to depth `depth` (inclusive of its parents).
    pub fn expand_to_depth(&mut self, depth: u32) {
        let mut frontier = vec![VertexId::ROOT];
        for _ in 0..depth {
            let mut next = Vec::new();
            for x in frontier {
                next.extend(self.expand(x).map(VertexId));
            }
            frontier = next;
        }
    }

    /// Structural self-check: parent/child links agree, potentials add up and
    /// cached `Lambda` matches its recomputation.
    pub fn validate(&self) -> Result<()> {
        for (i, rec) in self.vertices.iter().enumerate().skip(1) {
            let id = VertexId(i as u32);
            let p = rec
                .parent()
                .ok_or_else(|| Error::Usage(format!("vertex {i} has no parent")))?;
            if !self.children(p).any(|c| c == id) {
                return Err(Error::Usage(format!(
                    "vertex {i} missing from its parent's children"
                )));
            }
            if id != VertexId::ROOT {
                let expect = self.potential(p) + rec.dv;
                if expect != rec.v {
                    return Err(Error::Usage(format!("vertex {i}: V != V(parent) + dV")));
                }
            } else if rec.v != 0.0 {
                return Err(Error::Usage("root potential must be 0".into()));
            }
            if rec.is_expanded() {
                let mut lambda = 0.0;
                for c in self.children(id) {
                    if self.parent(c) != Some(id) {
                        return Err(Error::Usage(format!(
                            "child {} of {i} points elsewhere",
                            c.0
                        )));
                    }
                    lambda += (-self.record(c).dv).exp();
                }
                if (lambda - rec.lambda).abs() > 1e-12 * lambda.max(1.0) {
                    return Err(Error::Usage(format!("vertex {i}: cached Lambda is stale")));
                }
            }
        }
        Ok(())
    }

    /// Line-based dump `vertex_id,parent_id,V,dV` of all realized tree vertices.
    pub fn dump(&self) -> String {
        let mut s = String::from("# vertex_id,parent_id,V,dV\n");
        for (i, rec) in self.vertices.iter().enumerate().skip(1) {
            let parent = if i == VertexId::ROOT.index() {
                "-".to_string()
            } else {
                rec.parent.to_string()
            };
            let _ = writeln!(s, "{i},{parent},{:?},{:?}", rec.v, rec.dv);
        }
        s
    }

    /// Rebuild a frozen arena from [`TreeArena::dump`] output.
    ///
    /// Vertex ids are reassigned; unexpanded vertices of the original become leaves.
    pub fn from_dump(text: &str) -> Result<(Self, Vec<(u32, VertexId)>)> {
        let mut rows: Vec<(u32, Option<u32>, f64)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(Error::Schema(format!("line {}: expected 4 fields", ln + 1)));
            }
            let bad = |what: &str| Error::Schema(format!("line {}: bad {what}", ln + 1));
            let id: u32 = f[0].parse().map_err(|_| bad("vertex_id"))?;
            let parent = if f[1] == "-" {
                None
            } else {
                Some(f[1].parse::<u32>().map_err(|_| bad("parent_id"))?)
            };
            let dv: f64 = f[3].parse().map_err(|_| bad("dV"))?;
            rows.push((id, parent, dv));
        }
        let root = rows
            .iter()
            .find(|r| r.1.is_none())
            .ok_or_else(|| Error::Schema("dump has no root".into()))?
            .0;
        let mut kids: std::collections::HashMap<u32, Vec<(u32, f64)>> = Default::default();
        for &(id, parent, dv) in &rows {
            if let Some(p) = parent {
                kids.entry(p).or_default().push((id, dv));
            }
        }
        let mut arena = TreeArena::frozen();
        let mut mapping = vec![(root, VertexId::ROOT)];
        let mut queue = std::collections::VecDeque::from([(root, VertexId::ROOT)]);
        while let Some((old, new)) = queue.pop_front() {
            let ch = kids.remove(&old).unwrap_or_default();
            let dvs: Vec<f64> = ch.iter().map(|c| c.1).collect();
            let range = arena.set_children(new, &dvs)?;
            for (c, nid) in ch.iter().zip(range) {
                mapping.push((c.0, VertexId(nid)));
                queue.push_back((c.0, VertexId(nid)));
            }
        }
        if !kids.is_empty() {
            return Err(Error::Schema(
                "dump contains vertices unreachable from the root".into(),
            ));
        }
        Ok((arena, mapping))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_root_has_two_children() {
        let law = EnvironmentLaw::two_point();
        let EnvironmentLaw::TwoPoint { jump, .. } = law else {
            unreachable!()
        };
        let mut arena = TreeArena::new(law, 7, 0);
        let kids = arena.expand(VertexId::ROOT);
        assert_eq!(kids.len(), 2);
        for c in kids.clone() {
            let v = arena.potential(VertexId(c));
            assert!(v == jump || v == -jump);
        }
        let before: Vec<f64> = kids.clone().map(|c| arena.potential(VertexId(c))).collect();
        let again = arena.expand(VertexId::ROOT);
        assert_eq!(again, kids);
        let after: Vec<f64> = again.map(|c| arena.potential(VertexId(c))).collect();
        assert_eq!(before, after);
        arena.validate().unwrap();
    }

    #[test]
    fn transition_examples() {
        let mut a = TreeArena::frozen();
        let c = a.set_children(VertexId::ROOT, &[0.0]).unwrap();
        let t = a.transition_probs(VertexId::ROOT).unwrap();
        assert_eq!(t.to_parent, 0.5);
        assert_eq!(t.to_children, vec![(VertexId(c.start), 0.5)]);

        let mut b = TreeArena::frozen();
        b.set_children(VertexId::ROOT, &[3.0f64.ln()]).unwrap();
        let t = b.transition_probs(VertexId::ROOT).unwrap();
        assert!((t.to_parent - 0.75).abs() < 1e-15);
        assert!((t.to_children[0].1 - 0.25).abs() < 1e-15);

        let a_jump = (2.0 + 3.0f64.sqrt()).ln();
        let mut d = TreeArena::frozen();
        d.set_children(VertexId::ROOT, &[a_jump, -a_jump]).unwrap();
        let t = d.transition_probs(VertexId::ROOT).unwrap();
        assert!((t.to_parent - 0.2).abs() < 1e-15);

        let back = d.transition_probs(VertexId::BACK_ROOT).unwrap();
        assert_eq!(back.to_children, vec![(VertexId::ROOT, 1.0)]);
    }

    #[test]
    fn unexpanded_vertex_is_usage_error() {
        let a = TreeArena::new(EnvironmentLaw::two_point(), 1, 0);
        assert!(matches!(
            a.transition_probs(VertexId::ROOT),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn expansion_order_does_not_change_tree() {
        let law = EnvironmentLaw::fixed_gaussian(3).unwrap();
        let mut bfs = TreeArena::new(law, 99, 4);
        bfs.expand_to_depth(4);
        // Expand a different way: deepest-first along the last child.
        let mut dfs = TreeArena::new(law, 99, 4);
        fn rec(a: &mut TreeArena, x: VertexId, left: u32) {
            if left == 0 {
                return;
            }
            let kids: Vec<VertexId> = a.expand(x).map(VertexId).collect();
            for k in kids.into_iter().rev() {
                rec(a, k, left - 1);
            }
        }
        rec(&mut dfs, VertexId::ROOT, 4);
        let mut p1: Vec<(u32, i64)> = Vec::new();
        let mut p2: Vec<(u32, i64)> = Vec::new();
        for (a, out) in [(&bfs, &mut p1), (&dfs, &mut p2)] {
            for i in 1..a.len() {
                let r = a.record(VertexId(i as u32));
                out.push((r.depth(), (r.potential() * 1e9).round() as i64));
            }
            out.sort();
        }
        assert_eq!(p1, p2);
    }

    #[test]
    fn fixed_gaussian_b3_root() {
        let law = EnvironmentLaw::fixed_gaussian(3).unwrap();
        let mut a = TreeArena::new(law, 5, 0);
        assert_eq!(a.expand(VertexId::ROOT).len(), 3);
    }

    #[test]
    fn dump_round_trip() {
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), 3, 1);
        a.expand_to_depth(3);
        let (b, _) = TreeArena::from_dump(&a.dump()).unwrap();
        assert_eq!(b.len(), a.len());
        b.validate().unwrap();
        let mut va: Vec<i64> = (1..a.len())
            .map(|i| (a.potential(VertexId(i as u32)) * 1e12) as i64)
            .collect();
        let mut vb: Vec<i64> = (1..b.len())
            .map(|i| (b.potential(VertexId(i as u32)) * 1e12) as i64)
            .collect();
        va.sort();
        vb.sort();
        assert_eq!(va, vb);
    }
}
