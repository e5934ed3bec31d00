//! Rooted trees with unit-length edges, points on them and tree geodesics.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Index of an edge in [`RootedTree::edges`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// Index of a vertex in [`RootedTree::labels`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A finite tree with edges oriented away from the root, each edge
/// parameterized by `[0, 1]` with `0` at its initial vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedTree {
    labels: Vec<String>,
    root: VertexId,
    edges: Vec<(VertexId, VertexId)>,
    parent_edge: Vec<Option<EdgeId>>,
    child_edges: Vec<Vec<EdgeId>>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    bfs: Vec<EdgeId>,
}

impl RootedTree {
    /// Builds and validates a tree from vertex labels, `(initial, terminal)`
    /// label pairs and the root label.
    pub fn new<L: AsRef<str>>(vertices: &[L], edges: &[(L, L)], root: &str) -> Result<Self> {
        let mut index = HashMap::new();
        let mut labels = Vec::with_capacity(vertices.len());
        for v in vertices {
            let v = v.as_ref();
            if index.insert(v.to_string(), VertexId(labels.len())).is_some() {
                return Err(Error::invariant("distinct_vertices", format!("vertex `{v}` listed twice")));
            }
            labels.push(v.to_string());
        }
        let root = *index
            .get(root)
            .ok_or_else(|| Error::invariant("known_vertices", format!("root `{root}` is not a vertex")))?;
        let mut resolved = Vec::with_capacity(edges.len());
        for (k, (a, b)) in edges.iter().enumerate() {
            let lookup = |l: &str| {
                index.get(l).copied().ok_or_else(|| {
                    Error::invariant("known_vertices", format!("edge {k} references unknown vertex `{l}`"))
                })
            };
            resolved.push((lookup(a.as_ref())?, lookup(b.as_ref())?));
        }
        Self::build(labels, resolved, root)
    }

    /// Tree on vertices labelled `"0"..="n"` from index pairs.
    pub fn from_index_edges(vertex_count: usize, edges: &[(usize, usize)], root: usize) -> Result<Self> {
        let labels: Vec<String> = (0..vertex_count).map(|i| i.to_string()).collect();
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::invariant("known_vertices", format!("edge {k} references unknown vertex")));
            }
        }
        if root >= vertex_count {
            return Err(Error::invariant("known_vertices", format!("root `{root}` is not a vertex")));
        }
        let edges = edges.iter().map(|&(a, b)| (VertexId(a), VertexId(b))).collect();
        Self::build(labels, edges, VertexId(root))
    }

    /// `[0, 1]` rooted at `0`.
    pub fn interval() -> Self {
        Self::path(1)
    }

    /// Path `0 → 1 → … → n`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
        Self::from_index_edges(n + 1, &edges, 0).expect("path is a tree")
    }

    /// `k` edges out of the root.
    pub fn star(k: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..=k).map(|i| (0, i)).collect();
        Self::from_index_edges(k + 1, &edges, 0).expect("star is a tree")
    }

    fn build(labels: Vec<String>, edges: Vec<(VertexId, VertexId)>, root: VertexId) -> Result<Self> {
        let n = labels.len();
        if edges.is_empty() {
            return Err(Error::invariant("nonempty", "a tree needs at least one edge"));
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::invariant("acyclic", format!("edge {k} is a loop at `{}`", labels[a.0])));
            }
        }
        if edges.len() >= n {
            return Err(Error::invariant(
                "acyclic",
                format!("{} edges on {} vertices (a tree has |V|-1 edges)", edges.len(), n),
            ));
        }
        if edges.len() + 1 < n {
            return Err(Error::invariant(
                "connected",
                format!("{} edges on {} vertices (a tree has |V|-1 edges)", edges.len(), n),
            ));
        }
        let mut parent_edge = vec![None; n];
        let mut child_edges = vec![Vec::new(); n];
        for (k, &(a, b)) in edges.iter().enumerate() {
            if b == root {
                return Err(Error::invariant(
                    "root_no_incoming",
                    format!("edge {k} points into the root `{}`", labels[b.0]),
                ));
            }
            if parent_edge[b.0].replace(EdgeId(k)).is_some() {
                return Err(Error::invariant(
                    "unique_parent",
                    format!("vertex `{}` has more than one incoming edge", labels[b.0]),
                ));
            }
            child_edges[a.0].push(EdgeId(k));
        }
        let mut depth = vec![usize::MAX; n];
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut bfs = Vec::with_capacity(edges.len());
        let mut queue = VecDeque::from([root]);
        depth[root.0] = 0;
        while let Some(u) = queue.pop_front() {
            for &e in &child_edges[u.0] {
                let w = edges[e.0].1;
                depth[w.0] = depth[u.0] + 1;
                bfs.push(e);
                queue.push_back(w);
            }
        }
        if let Some(bad) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::invariant(
                "acyclic",
                format!("vertex `{}` is not reachable from the root (cycle in parent links)", labels[bad]),
            ));
        }
        // Euler tour for subtree tests.
        let mut clock = 0;
        let mut stack = vec![(root, 0usize)];
        tin[root.0] = clock;
        while let Some((u, next)) = stack.pop() {
            if next < child_edges[u.0].len() {
                stack.push((u, next + 1));
                let w = edges[child_edges[u.0][next].0].1;
                clock += 1;
                tin[w.0] = clock;
                stack.push((w, 0));
            } else {
                tout[u.0] = clock + 1;
            }
        }
        Ok(RootedTree { labels, root, edges, parent_edge, child_edges, depth, tin, tout, bfs })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn init(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].0
    }

    pub fn term(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].1
    }

    pub fn edge_endpoints(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn parent_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.parent_edge[v.0]
    }

    /// Edges whose initial vertex is `v`.
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.child_edges[v.0]
    }

    pub fn root_edges(&self) -> &[EdgeId] {
        &self.child_edges[self.root.0]
    }

    /// Edges in breadth-first order from the root; parents precede children.
    pub fn bfs_edges(&self) -> &[EdgeId] {
        &self.bfs
    }

    pub fn check_edge(&self, e: EdgeId) -> Result<()> {
        if e.0 < self.edges.len() {
            Ok(())
        } else {
            Err(Error::input(format!("unknown edge id {e} (tree has {} edges)", self.edges.len())))
        }
    }

    /// `e2` is next to `e1`: the terminal vertex of `e1` is the initial vertex of `e2`.
    pub fn is_next_to(&self, e1: EdgeId, e2: EdgeId) -> Result<bool> {
        self.check_edge(e1)?;
        self.check_edge(e2)?;
        Ok(self.term(e1) == self.init(e2))
    }

    /// Distinct edges sharing their initial vertex.
    pub fn is_beside(&self, e1: EdgeId, e2: EdgeId) -> Result<bool> {
        self.check_edge(e1)?;
        self.check_edge(e2)?;
        if e1 == e2 {
            return Err(Error::input(format!("is_beside needs distinct edges, got {e1} twice")));
        }
        Ok(self.init(e1) == self.init(e2))
    }

    /// Edges next to `e`.
    pub fn next_edges(&self, e: EdgeId) -> &[EdgeId] {
        &self.child_edges[self.term(e).0]
    }

    /// `u` lies in the closed subtree hanging from `v`.
    pub fn vertex_below(&self, u: VertexId, v: VertexId) -> bool {
        self.tin[v.0] <= self.tin[u.0] && self.tin[u.0] < self.tout[v.0]
    }

    /// `f` is reachable from `e` by a nonempty chain of next-to steps.
    pub fn edge_descends(&self, f: EdgeId, e: EdgeId) -> bool {
        f != e && self.vertex_below(self.init(f), self.term(e))
    }

    /// All edges strictly below `e`, sorted by id.
    pub fn descendants(&self, e: EdgeId) -> Result<Vec<EdgeId>> {
        self.check_edge(e)?;
        Ok(self.edge_ids().filter(|&f| self.edge_descends(f, e)).collect())
    }

    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> usize {
        let (mut x, mut y) = (a, b);
        let mut steps = 0;
        while self.depth[x.0] > self.depth[y.0] {
            x = self.init(self.parent_edge[x.0].unwrap());
            steps += 1;
        }
        while self.depth[y.0] > self.depth[x.0] {
            y = self.init(self.parent_edge[y.0].unwrap());
            steps += 1;
        }
        while x != y {
            x = self.init(self.parent_edge[x.0].unwrap());
            y = self.init(self.parent_edge[y.0].unwrap());
            steps += 2;
        }
        steps
    }

    /// Edges on the vertex path from `a` to `b`, each with its traversal
    /// direction (`true` when walked from initial to terminal vertex).
    fn vertex_path(&self, a: VertexId, b: VertexId) -> Vec<(EdgeId, bool)> {
        let (mut x, mut y) = (a, b);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[x.0] > self.depth[y.0] {
            let e = self.parent_edge[x.0].unwrap();
            up.push((e, false));
            x = self.init(e);
        }
        while self.depth[y.0] > self.depth[x.0] {
            let e = self.parent_edge[y.0].unwrap();
            down.push((e, true));
            y = self.init(e);
        }
        while x != y {
            let ex = self.parent_edge[x.0].unwrap();
            let ey = self.parent_edge[y.0].unwrap();
            up.push((ex, false));
            down.push((ey, true));
            x = self.init(ex);
            y = self.init(ey);
        }
        up.extend(down.into_iter().rev());
        up
    }

    /// Canonical point at parameter `pos` of edge `e`.
    pub fn point<S: Scalar>(&self, e: EdgeId, pos: S) -> Result<TreePoint<S>> {
        self.check_edge(e)?;
        if pos < S::zero() || pos > S::one() {
            return Err(Error::Domain(format!("edge position {pos} outside [0,1]")));
        }
        Ok(self.canonical(e, pos))
    }

    pub(crate) fn canonical<S: Scalar>(&self, e: EdgeId, pos: S) -> TreePoint<S> {
        if pos.is_zero() {
            self.vertex_point(self.init(e))
        } else {
            TreePoint { edge: e, pos }
        }
    }

    pub fn vertex_point<S: Scalar>(&self, v: VertexId) -> TreePoint<S> {
        match self.parent_edge[v.0] {
            Some(e) => TreePoint { edge: e, pos: S::one() },
            None => TreePoint { edge: self.root_edges()[0], pos: S::zero() },
        }
    }

    pub fn root_point<S: Scalar>(&self) -> TreePoint<S> {
        self.vertex_point(self.root)
    }

    /// The vertex a canonical point sits on, if any.
    pub fn point_vertex<S: Scalar>(&self, p: &TreePoint<S>) -> Option<VertexId> {
        if p.pos.is_zero() {
            Some(self.init(p.edge))
        } else if p.pos.is_one() {
            Some(self.term(p.edge))
        } else {
            None
        }
    }

    /// The unique geodesic from `p` to `q` as per-edge segments, in order,
    /// with zero-length pieces dropped.
    pub fn geodesic<S: Scalar>(&self, p: &TreePoint<S>, q: &TreePoint<S>) -> Vec<Segment<S>> {
        if p.edge == q.edge {
            if p.pos == q.pos {
                return Vec::new();
            }
            return vec![Segment { edge: p.edge, from: p.pos.clone(), to: q.pos.clone() }];
        }
        let exit_term = self.edge_descends(q.edge, p.edge);
        let enter_term = self.edge_descends(p.edge, q.edge);
        let x = if exit_term { self.term(p.edge) } else { self.init(p.edge) };
        let y = if enter_term { self.term(q.edge) } else { self.init(q.edge) };
        let mut out = Vec::new();
        let mut push = |edge: EdgeId, from: S, to: S| {
            if from != to {
                out.push(Segment { edge, from, to });
            }
        };
        push(p.edge, p.pos.clone(), if exit_term { S::one() } else { S::zero() });
        for (e, forward) in self.vertex_path(x, y) {
            if forward {
                push(e, S::zero(), S::one());
            } else {
                push(e, S::one(), S::zero());
            }
        }
        push(q.edge, if enter_term { S::one() } else { S::zero() }, q.pos.clone());
        out
    }

    pub fn distance<S: Scalar>(&self, p: &TreePoint<S>, q: &TreePoint<S>) -> S {
        self.geodesic(p, q).iter().fold(S::zero(), |acc, s| acc + s.length())
    }

    /// Point at arc length `d` from `p` along the geodesic to `q`
    /// (`0 ≤ d ≤ distance(p, q)`).
    pub fn point_along<S: Scalar>(&self, p: &TreePoint<S>, q: &TreePoint<S>, d: &S) -> TreePoint<S> {
        let mut left = d.clone();
        for seg in self.geodesic(p, q) {
            let len = seg.length();
            if left <= len {
                let pos = if seg.to > seg.from { seg.from.clone() + left } else { seg.from.clone() - left };
                return self.canonical(seg.edge, pos);
            }
            left = left - len;
        }
        q.clone()
    }
}

/// A point of a tree in canonical form: a vertex other than the root sits
/// at parameter `1` of its incoming edge, the root at parameter `0` of the
/// first root edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePoint<S> {
    edge: EdgeId,
    pos: S,
}

impl<S: Scalar> TreePoint<S> {
    pub fn edge(&self) -> EdgeId {
        self.edge
    }

    pub fn pos(&self) -> &S {
        &self.pos
    }
}

/// One straight piece of a geodesic, inside a single edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment<S> {
    pub edge: EdgeId,
    pub from: S,
    pub to: S,
}

impl<S: Scalar> Segment<S> {
    pub fn length(&self) -> S {
        (self.to.clone() - self.from.clone()).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    /// Root v, e1: v→a, e2: a→b, e3: a→c.
    fn v_tree() -> RootedTree {
        RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap()
    }

    #[test]
    fn next_to_and_beside_on_v_tree() {
        let t = v_tree();
        let (e1, e2, e3) = (EdgeId(0), EdgeId(1), EdgeId(2));
        assert!(t.is_next_to(e1, e2).unwrap());
        assert!(!t.is_next_to(e2, e1).unwrap());
        assert!(!t.is_next_to(e2, e3).unwrap());
        assert!(t.is_beside(e2, e3).unwrap());
        assert!(!t.is_beside(e1, e2).unwrap());
        assert!(t.is_beside(e1, e1).is_err());
        assert!(t.is_next_to(e1, EdgeId(9)).is_err());
        let p = RootedTree::path(2);
        assert!(!p.is_beside(EdgeId(0), EdgeId(1)).unwrap());
    }

    #[test]
    fn descendants_are_transitive_next_to_chains() {
        let t = v_tree();
        assert_eq!(t.descendants(EdgeId(0)).unwrap(), vec![EdgeId(1), EdgeId(2)]);
        assert!(t.descendants(EdgeId(1)).unwrap().is_empty());
        let p = RootedTree::path(3);
        assert_eq!(p.descendants(EdgeId(0)).unwrap(), vec![EdgeId(1), EdgeId(2)]);
    }

    #[test]
    fn validation_names_the_broken_invariant() {
        let cyc = RootedTree::new(&["a", "b"], &[("a", "b"), ("b", "a")], "a").unwrap_err();
        assert!(matches!(cyc, Error::Invariant { invariant: "acyclic", .. }));
        let two = RootedTree::new(&["a", "b", "c"], &[("a", "c"), ("b", "c")], "a").unwrap_err();
        assert!(matches!(two, Error::Invariant { invariant: "unique_parent", .. }));
        let into_root = RootedTree::new(&["a", "b"], &[("b", "a")], "a").unwrap_err();
        assert!(matches!(into_root, Error::Invariant { invariant: "root_no_incoming", .. }));
        let unknown = RootedTree::new(&["a", "b"], &[("a", "z")], "a").unwrap_err();
        assert!(unknown.to_string().contains("`z`"));
        let sparse = RootedTree::new(&["a", "b", "c"], &[("a", "b")], "a").unwrap_err();
        assert!(matches!(sparse, Error::Invariant { invariant: "connected", .. }));
    }

    #[test]
    fn canonical_points_collapse_shared_vertices() {
        let t = v_tree();
        let a_from_e2 = t.point(EdgeId(1), q(0, 1)).unwrap();
        let a_from_e1 = t.point(EdgeId(0), q(1, 1)).unwrap();
        assert_eq!(a_from_e1, a_from_e2);
        assert_eq!(t.point(EdgeId(0), q(0, 1)).unwrap(), t.root_point());
        assert!(t.point(EdgeId(0), q(3, 2)).is_err());
    }

    #[test]
    fn geodesics_between_siblings_pass_through_the_branch_vertex() {
        let t = v_tree();
        let p = t.point(EdgeId(1), q(1, 2)).unwrap();
        let r = t.point(EdgeId(2), q(1, 4)).unwrap();
        let g = t.geodesic(&p, &r);
        assert_eq!(g.len(), 2);
        assert_eq!(t.distance(&p, &r), q(3, 4));
        let root = t.root_point();
        assert_eq!(t.distance(&root, &p), q(3, 2));
        assert_eq!(t.point_along(&root, &p, &q(1, 1)), t.vertex_point(VertexId(1)));
        assert_eq!(t.point_along(&root, &p, &q(5, 4)), t.point(EdgeId(1), q(1, 4)).unwrap());
    }

    #[test]
    fn vertex_distance_matches_point_distance() {
        let t = RootedTree::from_index_edges(6, &[(0, 1), (1, 2), (1, 3), (0, 4), (4, 5)], 0).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                let pa: TreePoint<Rational> = t.vertex_point(VertexId(a));
                let pb = t.vertex_point(VertexId(b));
                assert_eq!(t.distance(&pa, &pb), Rational::from_i64(t.vertex_distance(VertexId(a), VertexId(b)) as i64));
            }
        }
    }
}
