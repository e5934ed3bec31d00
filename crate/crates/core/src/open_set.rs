//! Open subsets of `X \ v` with rational endpoints.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint, VertexId};
use crate::Rational;

/// An open subset of a rooted tree avoiding the root.
///
/// Stored per edge as sorted, pairwise disjoint open intervals `(a, b)`
/// with `0 ≤ a < b ≤ 1`, plus membership of each vertex. An endpoint at
/// `0` or `1` means the interval reaches that vertex; whether the vertex
/// itself belongs to the set is recorded separately. A vertex in the set
/// forces every incident edge to carry an interval reaching it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSubset<S = Rational> {
    tree: Arc<RootedTree>,
    intervals: Vec<Vec<(S, S)>>,
    vertices: Vec<bool>,
}

/// Per-edge membership pattern over a cut list: `segments[i]` covers the
/// open interval `(cuts[i], cuts[i+1])`, `points[i]` the interior cut
/// `cuts[i+1]`.
#[derive(Clone, Debug)]
pub(crate) struct EdgeMask<S> {
    pub cuts: Vec<S>,
    pub segments: Vec<bool>,
    pub points: Vec<bool>,
}

impl<S: Scalar> OpenSubset<S> {
    pub fn empty(tree: Arc<RootedTree>) -> Self {
        let (e, v) = (tree.edge_count(), tree.vertex_count());
        OpenSubset { tree, intervals: vec![Vec::new(); e], vertices: vec![false; v] }
    }

    /// Validating constructor.
    pub fn new(tree: Arc<RootedTree>, intervals: Vec<Vec<(S, S)>>, vertices: Vec<bool>) -> Result<Self> {
        if intervals.len() != tree.edge_count() || vertices.len() != tree.vertex_count() {
            return Err(Error::input("open subset arity does not match its tree"));
        }
        for (k, list) in intervals.iter().enumerate() {
            let mut prev: Option<&S> = None;
            for (a, b) in list {
                if *a < S::zero() || *b > S::one() || a >= b {
                    return Err(Error::invariant("open_intervals", format!("edge {k}: bad interval ({a}, {b})")));
                }
                if let Some(p) = prev {
                    if a < p {
                        return Err(Error::invariant("disjoint", format!("edge {k}: intervals overlap or are unsorted")));
                    }
                }
                prev = Some(b);
            }
        }
        if vertices[tree.root().0] {
            return Err(Error::invariant("root_excluded", "the root lies in the set"));
        }
        let set = OpenSubset { tree, intervals, vertices };
        for v in 0..set.vertices.len() {
            if set.vertices[v] && !set.reaches_all_sides(VertexId(v)) {
                return Err(Error::invariant(
                    "open",
                    format!("vertex {v} is a member without a neighbourhood"),
                ));
            }
        }
        Ok(set)
    }

    /// Builds from per-edge masks and vertex flags; runs are merged into
    /// maximal intervals.
    pub(crate) fn from_masks(tree: Arc<RootedTree>, masks: &[EdgeMask<S>], vertices: Vec<bool>) -> Self {
        let intervals = masks
            .iter()
            .map(|m| {
                let mut out: Vec<(S, S)> = Vec::new();
                let mut open: Option<S> = None;
                for i in 0..m.segments.len() {
                    if m.segments[i] {
                        if open.is_none() {
                            open = Some(m.cuts[i].clone());
                        }
                        let bridged = i + 1 < m.segments.len() && m.points[i] && m.segments[i + 1];
                        if !bridged {
                            out.push((open.take().unwrap(), m.cuts[i + 1].clone()));
                        }
                    }
                }
                out
            })
            .collect();
        let set = OpenSubset { tree, intervals, vertices };
        debug_assert!(set.clone().revalidate().is_ok());
        set
    }

    fn revalidate(self) -> Result<Self> {
        Self::new(self.tree, self.intervals, self.vertices)
    }

    fn reaches_all_sides(&self, v: VertexId) -> bool {
        let t = &self.tree;
        let incoming = t.parent_edge(v).is_none_or(|e| self.intervals[e.0].last().is_some_and(|(_, b)| b.is_one()));
        incoming && t.out_edges(v).iter().all(|e| self.intervals[e.0].first().is_some_and(|(a, _)| a.is_zero()))
    }

    pub fn tree(&self) -> &Arc<RootedTree> {
        &self.tree
    }

    pub fn intervals(&self, e: EdgeId) -> &[(S, S)] {
        &self.intervals[e.0]
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices[v.0]
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().all(|l| l.is_empty())
    }

    pub(crate) fn contains_on_edge(&self, e: EdgeId, s: &S) -> bool {
        if s.is_zero() {
            return self.vertices[self.tree.init(e).0];
        }
        if s.is_one() {
            return self.vertices[self.tree.term(e).0];
        }
        self.intervals[e.0].iter().any(|(a, b)| a < s && s < b)
    }

    pub(crate) fn closure_contains_on_edge(&self, e: EdgeId, s: &S) -> bool {
        if s.is_zero() {
            return self.closure_contains_vertex(self.tree.init(e));
        }
        if s.is_one() {
            return self.closure_contains_vertex(self.tree.term(e));
        }
        self.intervals[e.0].iter().any(|(a, b)| a <= s && s <= b)
    }

    fn closure_contains_vertex(&self, v: VertexId) -> bool {
        let t = &self.tree;
        self.vertices[v.0]
            || t.parent_edge(v).is_some_and(|e| self.intervals[e.0].last().is_some_and(|(_, b)| b.is_one()))
            || t.out_edges(v).iter().any(|e| self.intervals[e.0].first().is_some_and(|(a, _)| a.is_zero()))
    }

    pub fn contains(&self, p: &TreePoint<S>) -> bool {
        self.contains_on_edge(p.edge(), p.pos())
    }

    pub fn closure_contains(&self, p: &TreePoint<S>) -> bool {
        self.closure_contains_on_edge(p.edge(), p.pos())
    }

    pub fn closure_contains_root(&self) -> bool {
        self.closure_contains_vertex(self.tree.root())
    }

    /// Points of the closure outside the set, in canonical form, sorted and
    /// deduplicated.
    pub fn boundary_points(&self) -> Vec<TreePoint<S>> {
        let mut out = Vec::new();
        for (k, list) in self.intervals.iter().enumerate() {
            let e = EdgeId(k);
            for (a, b) in list {
                for s in [a, b] {
                    if !self.contains_on_edge(e, s) {
                        out.push(self.tree.canonical(e, s.clone()));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// `closure(self) ⊆ other`.
    pub fn closure_within(&self, other: &OpenSubset<S>) -> bool {
        self.intervals.iter().enumerate().all(|(k, list)| {
            let e = EdgeId(k);
            list.iter().all(|(a, b)| {
                other.intervals[k].iter().any(|(c, d)| {
                    let left = c < a || (a.is_zero() && c.is_zero() && other.vertices[self.tree.init(e).0]);
                    let right = b < d || (b.is_one() && d.is_one() && other.vertices[self.tree.term(e).0]);
                    left && right
                })
            })
        })
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &OpenSubset<S>) -> bool {
        self.vertices.iter().zip(&other.vertices).all(|(a, b)| !*a || *b)
            && self.intervals.iter().zip(&other.intervals).all(|(mine, theirs)| {
                mine.iter().all(|(a, b)| theirs.iter().any(|(c, d)| c <= a && b <= d))
            })
    }

    pub fn intersects(&self, other: &OpenSubset<S>) -> bool {
        self.vertices.iter().zip(&other.vertices).any(|(a, b)| *a && *b)
            || self.intervals.iter().zip(&other.intervals).any(|(mine, theirs)| {
                mine.iter().any(|(a, b)| theirs.iter().any(|(c, d)| S::max_of(a, c) < S::min_of(b, d)))
            })
    }

    /// Connected components, ordered by their first interval.
    pub fn pieces(&self) -> Vec<OpenSubset<S>> {
        let t = &self.tree;
        let mut ids = Vec::new();
        for (k, list) in self.intervals.iter().enumerate() {
            for i in 0..list.len() {
                ids.push((k, i));
            }
        }
        let index_of = |k: usize, i: usize| ids.iter().position(|&x| x == (k, i)).unwrap();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for v in 0..self.vertices.len() {
            if !self.vertices[v] {
                continue;
            }
            let v = VertexId(v);
            let mut touching = Vec::new();
            if let Some(e) = t.parent_edge(v) {
                touching.push(index_of(e.0, self.intervals[e.0].len() - 1));
            }
            for e in t.out_edges(v) {
                touching.push(index_of(e.0, 0));
            }
            for w in touching.windows(2) {
                let (ra, rb) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[ra] = rb;
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for x in 0..ids.len() {
            let r = find(&mut parent, x);
            match groups.iter_mut().find(|(root, _)| *root == r) {
                Some((_, g)) => g.push(x),
                None => groups.push((r, vec![x])),
            }
        }
        groups
            .into_iter()
            .map(|(_, members)| {
                let mut piece = OpenSubset::empty(self.tree.clone());
                for x in members {
                    let (k, i) = ids[x];
                    piece.intervals[k].push(self.intervals[k][i].clone());
                }
                for list in piece.intervals.iter_mut() {
                    list.sort();
                }
                for v in 0..self.vertices.len() {
                    piece.vertices[v] = self.vertices[v] && piece.reaches_all_sides(VertexId(v));
                }
                piece
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.pieces().len() <= 1
    }

    /// Disjoint union; errors when the sets overlap.
    pub fn disjoint_union(&self, other: &OpenSubset<S>) -> Result<Self> {
        if !Arc::ptr_eq(&self.tree, &other.tree) && self.tree != other.tree {
            return Err(Error::input("open subsets live on different trees"));
        }
        let mut out = self.clone();
        for (k, list) in other.intervals.iter().enumerate() {
            out.intervals[k].extend(list.iter().cloned());
            out.intervals[k].sort();
        }
        for v in 0..out.vertices.len() {
            out.vertices[v] |= other.vertices[v];
        }
        out.revalidate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn v_tree() -> Arc<RootedTree> {
        Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
    }

    #[test]
    fn vertex_membership_needs_all_sides() {
        let t = v_tree();
        let bad = OpenSubset::new(t.clone(), vec![vec![(q(1, 2), q(1, 1))], vec![(q(0, 1), q(1, 2))], vec![]], vec![
            false, true, false, false,
        ]);
        assert!(matches!(bad, Err(Error::Invariant { invariant: "open", .. })));
        let root = OpenSubset::new(t.clone(), vec![vec![(q(0, 1), q(1, 1))], vec![], vec![]], vec![true, false, false, false]);
        assert!(root.is_err());
    }

    #[test]
    fn pieces_split_at_excluded_vertices() {
        let t = v_tree();
        let glued = OpenSubset::new(
            t.clone(),
            vec![vec![(q(1, 3), q(1, 1))], vec![(q(0, 1), q(1, 1))], vec![(q(0, 1), q(1, 2))]],
            vec![false, true, true, false],
        )
        .unwrap();
        assert_eq!(glued.pieces().len(), 1);
        assert_eq!(glued.boundary_points(), vec![t.point(EdgeId(0), q(1, 3)).unwrap(), t.point(EdgeId(2), q(1, 2)).unwrap()]);
        let cut = OpenSubset::new(
            t.clone(),
            vec![vec![(q(1, 3), q(1, 1))], vec![(q(0, 1), q(1, 2))], vec![]],
            vec![false, false, false, false],
        )
        .unwrap();
        assert_eq!(cut.pieces().len(), 2);
        assert_eq!(cut.boundary_points().len(), 3);
    }

    #[test]
    fn closure_inclusion_respects_vertices() {
        let t = Arc::new(RootedTree::interval());
        let half = OpenSubset::new(t.clone(), vec![vec![(q(1, 2), q(1, 1))]], vec![false, true]).unwrap();
        let quarter = OpenSubset::new(t.clone(), vec![vec![(q(1, 4), q(1, 1))]], vec![false, true]).unwrap();
        let open_end = OpenSubset::new(t.clone(), vec![vec![(q(1, 4), q(1, 1))]], vec![false, false]).unwrap();
        assert!(half.closure_within(&quarter));
        assert!(!half.closure_within(&half));
        assert!(!half.closure_within(&open_end));
        assert!(!quarter.closure_contains_root());
        let all = OpenSubset::new(t, vec![vec![(q(0, 1), q(1, 1))]], vec![false, true]).unwrap();
        assert!(all.closure_contains_root());
        assert!(half.is_subset(&quarter) && !quarter.is_subset(&half));
    }
}
