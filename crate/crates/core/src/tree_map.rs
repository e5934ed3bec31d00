//! Continuous piecewise-geodesic maps between rooted trees.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pl::{eval_knots, same_tree, PlFunction};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint, VertexId};
use crate::Rational;

/// Waypoints `(s_k, p_k)` on one source edge; between consecutive waypoints
/// the map runs along the geodesic `p_k → p_{k+1}` at constant speed.
pub type Waypoints<S> = Vec<(S, TreePoint<S>)>;

/// A continuous map `Y → X` given by waypoints on each edge of `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlTreeMap<S = Rational> {
    source: Arc<RootedTree>,
    target: Arc<RootedTree>,
    waypoints: Vec<Waypoints<S>>,
}

impl<S: Scalar> PlTreeMap<S> {
    /// Validating constructor; waypoints must run from `0` to `1` and agree
    /// at shared vertices of the source.
    pub fn new(source: Arc<RootedTree>, target: Arc<RootedTree>, waypoints: Vec<Waypoints<S>>) -> Result<Self> {
        if waypoints.len() != source.edge_count() {
            return Err(Error::input(format!(
                "tree map has {} edge entries, source has {} edges",
                waypoints.len(),
                source.edge_count()
            )));
        }
        let mut canon = Vec::with_capacity(waypoints.len());
        for (k, list) in waypoints.into_iter().enumerate() {
            if list.len() < 2 || !list[0].0.is_zero() || !list[list.len() - 1].0.is_one() {
                return Err(Error::invariant("waypoints", format!("edge {k}: parameters must run from 0 to 1")));
            }
            if list.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invariant("waypoints", format!("edge {k}: parameters not strictly increasing")));
            }
            let mut pts = Vec::with_capacity(list.len());
            for (s, p) in list {
                pts.push((s, target.point(p.edge(), p.pos().clone())?));
            }
            canon.push(pts);
        }
        let map = Self::from_waypoints(source, target, canon);
        map.check_continuity()?;
        Ok(map)
    }

    pub(crate) fn from_waypoints(source: Arc<RootedTree>, target: Arc<RootedTree>, waypoints: Vec<Waypoints<S>>) -> Self {
        let mut map = PlTreeMap { source, target, waypoints };
        map.canonicalize();
        map
    }

    fn canonicalize(&mut self) {
        let target = self.target.clone();
        for list in self.waypoints.iter_mut() {
            let mut out: Waypoints<S> = Vec::with_capacity(list.len());
            for w in list.drain(..) {
                while out.len() >= 2 {
                    let (s0, p0) = &out[out.len() - 2];
                    let (s1, p1) = &out[out.len() - 1];
                    let d01 = target.distance(p0, p1);
                    let d12 = target.distance(p1, &w.1);
                    let straight = target.distance(p0, &w.1) == d01.clone() + d12.clone();
                    let same_speed = d01 * (w.0.clone() - s1.clone()) == d12 * (s1.clone() - s0.clone());
                    if straight && same_speed {
                        out.pop();
                    } else {
                        break;
                    }
                }
                out.push(w);
            }
            *list = out;
        }
    }

    fn check_continuity(&self) -> Result<()> {
        let y = &self.source;
        for v in 0..y.vertex_count() {
            let v = VertexId(v);
            let mut images = Vec::new();
            if let Some(e) = y.parent_edge(v) {
                images.push((e, self.waypoints[e.0].last().unwrap().1.clone()));
            }
            for &e in y.out_edges(v) {
                images.push((e, self.waypoints[e.0][0].1.clone()));
            }
            if let Some((e0, p0)) = images.first() {
                if let Some((e, _)) = images.iter().find(|(_, p)| p != p0) {
                    return Err(Error::invariant(
                        "continuity",
                        format!("edges {e0} and {e} disagree at vertex `{}`", y.labels()[v.0]),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The constant map onto `p`.
    pub fn constant(source: Arc<RootedTree>, target: Arc<RootedTree>, p: TreePoint<S>) -> Self {
        let waypoints = vec![vec![(S::zero(), p.clone()), (S::one(), p)]; source.edge_count()];
        PlTreeMap { source, target, waypoints }
    }

    pub fn identity(tree: Arc<RootedTree>) -> Self {
        let waypoints = tree
            .edge_ids()
            .map(|e| vec![(S::zero(), tree.canonical(e, S::zero())), (S::one(), tree.canonical(e, S::one()))])
            .collect();
        PlTreeMap { source: tree.clone(), target: tree, waypoints }
    }

    pub fn source(&self) -> &Arc<RootedTree> {
        &self.source
    }

    pub fn target(&self) -> &Arc<RootedTree> {
        &self.target
    }

    pub fn waypoints(&self, e: EdgeId) -> &[(S, TreePoint<S>)] {
        &self.waypoints[e.0]
    }

    pub fn vertex_image(&self, v: VertexId) -> TreePoint<S> {
        match self.source.parent_edge(v) {
            Some(e) => self.waypoints[e.0].last().unwrap().1.clone(),
            None => self.waypoints[self.source.root_edges()[0].0][0].1.clone(),
        }
    }

    /// The map sends the source root to the target root.
    pub fn preserves_root(&self) -> bool {
        self.vertex_image(self.source.root()) == self.target.root_point()
    }

    pub fn eval_edge(&self, e: EdgeId, s: &S) -> TreePoint<S> {
        let list = &self.waypoints[e.0];
        let i = list.partition_point(|(t, _)| t <= s);
        if i == 0 {
            return list[0].1.clone();
        }
        if i == list.len() {
            return list[i - 1].1.clone();
        }
        let (s0, p0) = &list[i - 1];
        let (s1, p1) = &list[i];
        let len = self.target.distance(p0, p1);
        let along = len * (s.clone() - s0.clone()) / (s1.clone() - s0.clone());
        self.target.point_along(p0, p1, &along)
    }

    pub fn eval(&self, y: &TreePoint<S>) -> TreePoint<S> {
        self.eval_edge(y.edge(), y.pos())
    }

    /// `f ∘ self`.
    pub fn pull_back(&self, f: &PlFunction<S>) -> Result<PlFunction<S>> {
        if !same_tree(f.tree(), &self.target) {
            return Err(Error::input("function does not live on the target of the map"));
        }
        let x = &self.target;
        let knots = self
            .waypoints
            .iter()
            .map(|list| {
                let mut out: Vec<(S, S)> = Vec::new();
                for w in list.windows(2) {
                    let ((s0, p0), (s1, p1)) = (&w[0], &w[1]);
                    out.push((s0.clone(), f.eval(p0)));
                    let path = x.geodesic(p0, p1);
                    let total = path.iter().fold(S::zero(), |a, g| a + g.length());
                    let mut walked = S::zero();
                    for seg in path {
                        let k = f.knots(seg.edge);
                        let (lo, hi) = (S::min_of(&seg.from, &seg.to), S::max_of(&seg.from, &seg.to));
                        let mut inner: Vec<&(S, S)> = k.iter().filter(|(t, _)| lo < *t && *t < hi).collect();
                        if seg.to < seg.from {
                            inner.reverse();
                        }
                        for (t, v) in inner {
                            let d = walked.clone() + (t.clone() - seg.from.clone()).abs();
                            out.push((s0.clone() + (s1.clone() - s0.clone()) * d / total.clone(), v.clone()));
                        }
                        walked = walked + seg.length();
                        let end = s0.clone() + (s1.clone() - s0.clone()) * walked.clone() / total.clone();
                        out.push((end, eval_knots(k, &seg.to)));
                    }
                }
                let last = list.last().unwrap();
                out.push((last.0.clone(), f.eval(&last.1)));
                out
            })
            .collect();
        Ok(PlFunction::from_knots(self.source.clone(), knots))
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &PlTreeMap<S>) -> Result<PlTreeMap<S>> {
        if !same_tree(inner.target(), &self.source) {
            return Err(Error::input("maps are not composable"));
        }
        let y = &self.source;
        let waypoints = inner
            .waypoints
            .iter()
            .map(|list| {
                let mut out: Waypoints<S> = Vec::new();
                for w in list.windows(2) {
                    let ((s0, q0), (s1, q1)) = (&w[0], &w[1]);
                    out.push((s0.clone(), self.eval(q0)));
                    let path = y.geodesic(q0, q1);
                    let total = path.iter().fold(S::zero(), |a, g| a + g.length());
                    let mut walked = S::zero();
                    for seg in path {
                        let (lo, hi) = (S::min_of(&seg.from, &seg.to), S::max_of(&seg.from, &seg.to));
                        let mut inner_pts: Vec<&S> =
                            self.waypoints[seg.edge.0].iter().map(|(t, _)| t).filter(|t| lo < **t && **t < hi).collect();
                        if seg.to < seg.from {
                            inner_pts.reverse();
                        }
                        for t in inner_pts {
                            let d = walked.clone() + (t.clone() - seg.from.clone()).abs();
                            out.push((s0.clone() + (s1.clone() - s0.clone()) * d / total.clone(), self.eval_edge(seg.edge, t)));
                        }
                        walked = walked + seg.length();
                        let end = s0.clone() + (s1.clone() - s0.clone()) * walked.clone() / total.clone();
                        out.push((end, self.eval_edge(seg.edge, &seg.to)));
                    }
                }
                let last = list.last().unwrap();
                out.push((last.0.clone(), self.eval(&last.1)));
                out.dedup_by(|b, a| a.0 == b.0);
                out
            })
            .collect();
        Ok(Self::from_waypoints(inner.source.clone(), self.target.clone(), waypoints))
    }

    /// Precomposition with a root-preserving automorphism of the source
    /// given as an edge permutation: the result sends edge `e` like the
    /// original sends `perm[e]`.
    pub fn precompose_automorphism(&self, perm: &[EdgeId]) -> Result<PlTreeMap<S>> {
        let y = &self.source;
        if perm.len() != y.edge_count() {
            return Err(Error::input("permutation arity does not match the source"));
        }
        for e in y.edge_ids() {
            let f = perm[e.0];
            y.check_edge(f)?;
            let parent_ok = match y.parent_edge(y.init(e)) {
                None => y.parent_edge(y.init(f)).is_none(),
                Some(p) => y.parent_edge(y.init(f)) == Some(perm[p.0]),
            };
            if !parent_ok {
                return Err(Error::input(format!("edge permutation is not a tree automorphism at edge {e}")));
            }
        }
        let waypoints = perm.iter().map(|f| self.waypoints[f.0].clone()).collect();
        Ok(PlTreeMap { source: self.source.clone(), target: self.target.clone(), waypoints })
    }
}
