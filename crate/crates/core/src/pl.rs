//! Continuous piecewise-linear functions on a rooted tree.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::open_set::{EdgeMask, OpenSubset};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint, VertexId};
use crate::Rational;

/// Per-edge knot list `(breakpoint, value)`, linear in between.
pub type Knots<S> = Vec<(S, S)>;

/// A continuous PL function `X → [0, ∞)` in canonical form: on every edge
/// breakpoints increase strictly from `0` to `1` and no breakpoint is
/// collinear with its neighbours.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlFunction<S = Rational> {
    tree: Arc<RootedTree>,
    knots: Vec<Knots<S>>,
}

pub(crate) fn same_tree(a: &Arc<RootedTree>, b: &Arc<RootedTree>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn eval_knots<S: Scalar>(knots: &[(S, S)], s: &S) -> S {
    let i = knots.partition_point(|(t, _)| t <= s);
    if i == 0 {
        return knots[0].1.clone();
    }
    if i == knots.len() {
        return knots[i - 1].1.clone();
    }
    let (t0, v0) = &knots[i - 1];
    if s == t0 {
        return v0.clone();
    }
    let (t1, v1) = &knots[i];
    v0.clone() + (v1.clone() - v0.clone()) * (s.clone() - t0.clone()) / (t1.clone() - t0.clone())
}

/// Drops breakpoints whose removal leaves the function unchanged.
pub(crate) fn canonical_knots<S: Scalar>(knots: Vec<(S, S)>) -> Knots<S> {
    let mut out: Knots<S> = Vec::with_capacity(knots.len());
    for k in knots {
        if out.last().is_some_and(|(t, _)| *t == k.0) {
            continue;
        }
        while out.len() >= 2 {
            let (t0, v0) = &out[out.len() - 2];
            let (t1, v1) = &out[out.len() - 1];
            let collinear =
                (v1.clone() - v0.clone()) * (k.0.clone() - t0.clone()) == (k.1.clone() - v0.clone()) * (t1.clone() - t0.clone());
            if collinear {
                out.pop();
            } else {
                break;
            }
        }
        out.push(k);
    }
    out
}

/// Union of the breakpoints of several knot lists plus `extra`.
pub(crate) fn merged_cuts<S: Scalar>(lists: &[&[(S, S)]], extra: &[S]) -> Vec<S> {
    let mut cuts: Vec<S> = vec![S::zero(), S::one()];
    for l in lists {
        cuts.extend(l.iter().map(|(t, _)| t.clone()));
    }
    cuts.extend(extra.iter().cloned());
    cuts.sort();
    cuts.dedup();
    cuts
}

/// Evaluates a knot list at nondecreasing parameters.
pub(crate) struct KnotCursor<'a, S> {
    knots: &'a [(S, S)],
    i: usize,
}

impl<'a, S: Scalar> KnotCursor<'a, S> {
    pub(crate) fn new(knots: &'a [(S, S)]) -> Self {
        KnotCursor { knots, i: 0 }
    }

    pub(crate) fn eval(&mut self, s: &S) -> S {
        let k = self.knots;
        while self.i + 1 < k.len() && k[self.i + 1].0 <= *s {
            self.i += 1;
        }
        let (t0, v0) = &k[self.i];
        if s <= t0 || self.i + 1 == k.len() {
            return v0.clone();
        }
        let (t1, v1) = &k[self.i + 1];
        v0.clone() + (v1.clone() - v0.clone()) * (s.clone() - t0.clone()) / (t1.clone() - t0.clone())
    }
}

/// Values of every list at every cut, cut-major.
fn eval_grid<S: Scalar>(cuts: &[S], lists: &[&[(S, S)]]) -> Vec<Vec<S>> {
    let mut cursors: Vec<KnotCursor<S>> = lists.iter().map(|l| KnotCursor::new(l)).collect();
    cuts.iter().map(|t| cursors.iter_mut().map(|c| c.eval(t)).collect()).collect()
}

/// Adds the parameters where some list crosses one of `levels`, and, when
/// `pairwise`, where two lists cross each other.
pub(crate) fn insert_crossings<S: Scalar>(cuts: Vec<S>, lists: &[&[(S, S)]], levels: &[S], pairwise: bool) -> Vec<S> {
    let grid = eval_grid(&cuts, lists);
    let mut out = cuts.clone();
    for (w, vals) in cuts.windows(2).zip(grid.windows(2)) {
        let (t0, t1) = (&w[0], &w[1]);
        let (v0, v1) = (&vals[0], &vals[1]);
        let mut cross = |d0: S, d1: S| {
            if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                let frac = d0.clone() / (d0 - d1);
                out.push(t0.clone() + (t1.clone() - t0.clone()) * frac);
            }
        };
        for i in 0..lists.len() {
            for c in levels {
                cross(v0[i].clone() - c.clone(), v1[i].clone() - c.clone());
            }
            if pairwise {
                for j in i + 1..lists.len() {
                    cross(v0[i].clone() - v0[j].clone(), v1[i].clone() - v1[j].clone());
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

impl<S: Scalar> PlFunction<S> {
    /// Validating constructor from per-edge knot lists.
    pub fn new(tree: Arc<RootedTree>, knots: Vec<Knots<S>>) -> Result<Self> {
        if knots.len() != tree.edge_count() {
            return Err(Error::input(format!(
                "PL function has {} edge entries, tree has {} edges",
                knots.len(),
                tree.edge_count()
            )));
        }
        for (k, list) in knots.iter().enumerate() {
            if list.len() < 2 || !list[0].0.is_zero() || !list[list.len() - 1].0.is_one() {
                return Err(Error::invariant("breakpoints", format!("edge {k}: breakpoints must run from 0 to 1")));
            }
            if list.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invariant("breakpoints", format!("edge {k}: breakpoints not strictly increasing")));
            }
            if list.iter().any(|(_, v)| v.is_negative()) {
                return Err(Error::invariant("nonnegative", format!("edge {k}: negative value")));
            }
        }
        let f = Self::from_knots(tree, knots);
        f.check_continuity()?;
        Ok(f)
    }

    /// Canonicalizes without validating.
    pub(crate) fn from_knots(tree: Arc<RootedTree>, knots: Vec<Knots<S>>) -> Self {
        let knots = knots.into_iter().map(canonical_knots).collect();
        PlFunction { tree, knots }
    }

    fn check_continuity(&self) -> Result<()> {
        let t = &self.tree;
        for v in 0..t.vertex_count() {
            let v = VertexId(v);
            let mut seen: Option<(EdgeId, S)> = None;
            let incident = t.parent_edge(v).map(|e| (e, S::one())).into_iter().chain(t.out_edges(v).iter().map(|&e| (e, S::zero())));
            for (e, s) in incident {
                let val = eval_knots(&self.knots[e.0], &s);
                match &seen {
                    None => seen = Some((e, val)),
                    Some((e0, v0)) if *v0 != val => {
                        return Err(Error::invariant(
                            "continuity",
                            format!("edges {e0} and {e} disagree at vertex `{}`: {v0} vs {val}", t.labels()[v.0]),
                        ))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn constant(tree: Arc<RootedTree>, c: S) -> Self {
        let knots = vec![vec![(S::zero(), c.clone()), (S::one(), c)]; tree.edge_count()];
        PlFunction { tree, knots }
    }

    pub fn zero(tree: Arc<RootedTree>) -> Self {
        Self::constant(tree, S::zero())
    }

    pub fn tree(&self) -> &Arc<RootedTree> {
        &self.tree
    }

    pub fn knots(&self, e: EdgeId) -> &[(S, S)] {
        &self.knots[e.0]
    }

    pub fn all_knots(&self) -> &[Knots<S>] {
        &self.knots
    }

    pub fn eval_edge(&self, e: EdgeId, s: &S) -> S {
        eval_knots(&self.knots[e.0], s)
    }

    pub fn eval(&self, p: &TreePoint<S>) -> S {
        self.eval_edge(p.edge(), p.pos())
    }

    pub fn vertex_value(&self, v: VertexId) -> S {
        match self.tree.parent_edge(v) {
            Some(e) => self.eval_edge(e, &S::one()),
            None => self.eval_edge(self.tree.root_edges()[0], &S::zero()),
        }
    }

    pub fn root_value(&self) -> S {
        self.vertex_value(self.tree.root())
    }

    pub fn max_value(&self) -> S {
        self.knots.iter().flatten().map(|(_, v)| v).max().unwrap().clone()
    }

    pub fn min_value(&self) -> S {
        self.knots.iter().flatten().map(|(_, v)| v).min().unwrap().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.knots.iter().flatten().all(|(_, v)| v.is_zero())
    }

    /// Every value on a knot; the critical values of the function.
    pub fn critical_values(&self) -> Vec<S> {
        let mut vals: Vec<S> = self.knots.iter().flatten().map(|(_, v)| v.clone()).collect();
        vals.sort();
        vals.dedup();
        vals
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if same_tree(&self.tree, &other.tree) {
            Ok(())
        } else {
            Err(Error::input("PL functions live on different trees"))
        }
    }

    /// `h ∘ self` for a scalar map `h` that is linear between consecutive
    /// values of `levels`.
    pub fn map_values(&self, levels: &[S], h: impl Fn(&S) -> S) -> Self {
        let knots = self
            .knots
            .iter()
            .map(|k| {
                let cuts = insert_crossings(merged_cuts(&[k], &[]), &[k], levels, false);
                let mut c = KnotCursor::new(k);
                cuts.iter().map(|t| (t.clone(), h(&c.eval(t)))).collect()
            })
            .collect();
        Self::from_knots(self.tree.clone(), knots)
    }

    /// `(f − t)_+`.
    pub fn minus_t_plus(&self, t: &S) -> Self {
        let t0 = t.clone();
        self.map_values(std::slice::from_ref(t), move |v| {
            let d = v.clone() - t0.clone();
            if d.is_positive() {
                d
            } else {
                S::zero()
            }
        })
    }

    /// `c · f` for `c ≥ 0`.
    pub fn scale(&self, c: &S) -> Self {
        let c = c.clone();
        self.map_values(&[], move |v| v.clone() * c.clone())
    }

    fn zip(&self, other: &Self, pairwise: bool, op: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.check_same(other)?;
        let knots = self
            .knots
            .iter()
            .zip(&other.knots)
            .map(|(a, b)| {
                let cuts = merged_cuts(&[a, b], &[]);
                let cuts = if pairwise { insert_crossings(cuts, &[a, b], &[], true) } else { cuts };
                let (mut ca, mut cb) = (KnotCursor::new(a), KnotCursor::new(b));
                cuts.iter().map(|t| (t.clone(), op(&ca.eval(t), &cb.eval(t)))).collect()
            })
            .collect();
        Ok(Self::from_knots(self.tree.clone(), knots))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, false, |a, b| a.clone() + b.clone())
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.zip(other, true, S::min_of)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.zip(other, true, S::max_of)
    }

    /// Exact `sup |f − g|`, attained on the merged breakpoints.
    pub fn sup_norm_diff(&self, other: &Self) -> Result<S> {
        self.check_same(other)?;
        let mut best = S::zero();
        for (a, b) in self.knots.iter().zip(&other.knots) {
            let (mut ca, mut cb) = (KnotCursor::new(a), KnotCursor::new(b));
            for t in merged_cuts(&[a, b], &[]) {
                let d = (ca.eval(&t) - cb.eval(&t)).abs();
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }

    /// `{x ∈ X \ v : f(x) > t}`.
    pub fn superlevel(&self, t: &S) -> OpenSubset<S> {
        self.level_mask(t, true)
    }

    /// `{x ∈ X \ v : f(x) < t}`.
    pub fn sublevel(&self, t: &S) -> OpenSubset<S> {
        self.level_mask(t, false)
    }

    fn level_mask(&self, t: &S, above: bool) -> OpenSubset<S> {
        let inside = |v: &S| if above { v > t } else { v < t };
        let masks: Vec<EdgeMask<S>> = self
            .knots
            .iter()
            .map(|k| {
                let cuts = insert_crossings(merged_cuts(&[k], &[]), &[k], std::slice::from_ref(t), false);
                let mut c = KnotCursor::new(k);
                let vals: Vec<S> = cuts.iter().map(|s| c.eval(s)).collect();
                let segments = vals.windows(2).map(|w| inside(&S::midpoint(&w[0], &w[1]))).collect();
                let points = vals[1..vals.len() - 1].iter().map(inside).collect();
                EdgeMask { cuts, segments, points }
            })
            .collect();
        let tree = &self.tree;
        let vertices = (0..tree.vertex_count())
            .map(|v| VertexId(v) != tree.root() && inside(&self.vertex_value(VertexId(v))))
            .collect();
        OpenSubset::from_masks(self.tree.clone(), &masks, vertices)
    }

    /// Sorts a family pointwise in decreasing order: the `j`-th output is
    /// the `j`-th largest value at every point.
    pub fn sort_pointwise(fs: &[Self]) -> Result<Vec<Self>> {
        let Some(first) = fs.first() else { return Ok(Vec::new()) };
        for f in fs {
            first.check_same(f)?;
        }
        let tree = first.tree.clone();
        let mut out: Vec<Vec<Knots<S>>> = vec![Vec::with_capacity(tree.edge_count()); fs.len()];
        for e in 0..tree.edge_count() {
            let lists: Vec<&[(S, S)]> = fs.iter().map(|f| f.knots[e].as_slice()).collect();
            let cuts = insert_crossings(merged_cuts(&lists, &[]), &lists, &[], true);
            let mut columns: Vec<Knots<S>> = vec![Vec::with_capacity(cuts.len()); fs.len()];
            for (t, mut vals) in cuts.iter().zip(eval_grid(&cuts, &lists)) {
                vals.sort_by(|a, b| b.cmp(a));
                for (j, v) in vals.into_iter().enumerate() {
                    columns[j].push((t.clone(), v));
                }
            }
            for (j, c) in columns.into_iter().enumerate() {
                out[j].push(c);
            }
        }
        Ok(out.into_iter().map(|k| Self::from_knots(tree.clone(), k)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::generator;
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn interval() -> Arc<RootedTree> {
        Arc::new(RootedTree::interval())
    }

    fn v_tree() -> Arc<RootedTree> {
        Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
    }

    fn ramp1(pts: &[(i64, i64, i64, i64)]) -> PlFunction {
        let knots = pts.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect();
        PlFunction::new(interval(), vec![knots]).unwrap()
    }

    #[test]
    fn eval_on_generators() {
        let t = v_tree();
        let g1 = generator(&t, EdgeId(0)).unwrap();
        assert_eq!(g1.eval(&t.point(EdgeId(0), q(1, 2)).unwrap()), q(1, 2));
        assert_eq!(g1.eval(&t.point(EdgeId(2), q(1, 3)).unwrap()), q(1, 1));
        let g2 = generator(&t, EdgeId(1)).unwrap();
        assert_eq!(g2.eval(&t.point(EdgeId(0), q(1, 1)).unwrap()), q(0, 1));
    }

    #[test]
    fn minus_t_plus_inserts_the_crossing() {
        let id = ramp1(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        let cut = id.minus_t_plus(&q(1, 4));
        assert_eq!(cut.knots(EdgeId(0)), &[(q(0, 1), q(0, 1)), (q(1, 4), q(0, 1)), (q(1, 1), q(3, 4))]);
        assert_eq!(id.minus_t_plus(&q(0, 1)), id);
        let t = v_tree();
        let g1 = generator(&t, EdgeId(0)).unwrap().minus_t_plus(&q(1, 3));
        assert_eq!(g1.knots(EdgeId(0)), &[(q(0, 1), q(0, 1)), (q(1, 3), q(0, 1)), (q(1, 1), q(2, 3))]);
        assert_eq!(g1.knots(EdgeId(2)), &[(q(0, 1), q(2, 3)), (q(1, 1), q(2, 3))]);
    }

    #[test]
    fn sup_norm_of_the_shift_example() {
        let id = ramp1(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        let shift = ramp1(&[(0, 1, 3, 10), (7, 10, 1, 1), (1, 1, 1, 1)]);
        assert_eq!(id.sup_norm_diff(&shift).unwrap(), q(3, 10));
        assert_eq!(id.sup_norm_diff(&id).unwrap(), q(0, 1));
        assert_eq!(PlFunction::zero(interval()).sup_norm_diff(&id).unwrap(), q(1, 1));
        // Grid oracle at denominator 100.
        let mut best = q(0, 1);
        for i in 0..=100 {
            let s = q(i, 100);
            let d = (id.eval_edge(EdgeId(0), &s) - shift.eval_edge(EdgeId(0), &s)).abs();
            best = best.max(d);
        }
        assert_eq!(best, q(3, 10));
    }

    #[test]
    fn superlevel_examples() {
        let id = ramp1(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        let s = id.superlevel(&q(1, 2));
        assert_eq!(s.intervals(EdgeId(0)), &[(q(1, 2), q(1, 1))]);
        assert!(s.contains_vertex(VertexId(1)));
        assert!(id.superlevel(&q(1, 1)).is_empty());
        let plateau = ramp1(&[(0, 1, 0, 1), (1, 4, 0, 1), (3, 4, 1, 1), (1, 1, 1, 1)]);
        assert_eq!(plateau.superlevel(&q(1, 2)).intervals(EdgeId(0)), &[(q(1, 2), q(1, 1))]);
    }

    #[test]
    fn canonical_form_merges_collinear_knots() {
        let f = ramp1(&[(0, 1, 0, 1), (1, 2, 1, 2), (1, 1, 1, 1)]);
        assert_eq!(f.knots(EdgeId(0)).len(), 2);
    }

    #[test]
    fn continuity_is_checked_across_vertices() {
        let t = v_tree();
        let bad = PlFunction::new(
            t,
            vec![
                vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))],
                vec![(q(0, 1), q(1, 1)), (q(1, 1), q(1, 1))],
                vec![(q(0, 1), q(1, 2)), (q(1, 1), q(1, 1))],
            ],
        );
        assert!(matches!(bad, Err(Error::Invariant { invariant: "continuity", .. })));
    }

    #[test]
    fn sort_pointwise_swaps_at_crossings() {
        let up = ramp1(&[(0, 1, 0, 1), (1, 1, 1, 1)]);
        let down = ramp1(&[(0, 1, 1, 1), (1, 1, 0, 1)]);
        let sorted = PlFunction::sort_pointwise(&[up.clone(), down.clone()]).unwrap();
        assert_eq!(sorted[0], up.max(&down).unwrap());
        assert_eq!(sorted[1], up.min(&down).unwrap());
        assert_eq!(sorted[1].eval_edge(EdgeId(0), &q(1, 2)), q(1, 2));
        assert_eq!(sorted[1].max_value(), q(1, 2));
    }
}
