//! Lower semicontinuous `ℕ ∪ {∞}`-valued step functions on `X \ v`: the
//! concrete Cuntz semigroup of `C₀(X \ v)`.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;
use std::sync::Arc;

use crate::distance::{clearance, dist_to_closure};
use crate::error::{Error, Result};
use crate::open_set::{EdgeMask, OpenSubset};
use crate::pl::{same_tree, PlFunction};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint, VertexId};
use crate::Rational;

/// A value in `ℕ ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(u64),
    Infinite,
}

impl Default for Rank {
    fn default() -> Self {
        Rank::ZERO
    }
}

impl Rank {
    pub const ZERO: Rank = Rank::Finite(0);

    pub fn new(n: u64) -> Self {
        Rank::Finite(n)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Rank::Finite(n) => Some(n),
            Rank::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        self != Rank::Infinite
    }

    /// `self ≥ n` for a natural number `n`.
    pub fn at_least(self, n: u64) -> bool {
        self.finite().is_none_or(|m| m >= n)
    }
}

impl Add for Rank {
    type Output = Rank;

    fn add(self, rhs: Rank) -> Rank {
        match (self.finite(), rhs.finite()) {
            (Some(a), Some(b)) => Rank::new(a.saturating_add(b)),
            _ => Rank::Infinite,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for Rank {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "inf" | "∞" => Ok(Rank::Infinite),
            _ => s.parse::<u64>().map(Rank::new).map_err(|e| format!("bad rank `{s}`: {e}")),
        }
    }
}

/// Step data on one edge: `intervals[i]` is the value on
/// `(cuts[i], cuts[i+1])`, `points[i]` the value at the interior cut
/// `cuts[i+1]`. Vertex values live on the function itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSteps<S> {
    pub cuts: Vec<S>,
    pub intervals: Vec<Rank>,
    pub points: Vec<Rank>,
}

impl<S: Scalar> EdgeSteps<S> {
    fn interval_at(&self, s: &S) -> Rank {
        let i = self.cuts.partition_point(|t| t <= s);
        self.intervals[i.clamp(1, self.intervals.len()) - 1]
    }

    /// Value at an interior parameter `0 < s < 1`.
    fn at(&self, s: &S) -> Rank {
        match self.cuts[1..self.cuts.len() - 1].binary_search(s) {
            Ok(i) => self.points[i],
            Err(_) => self.interval_at(s),
        }
    }

    fn canonical(self) -> Self {
        let mut cuts = vec![self.cuts[0].clone()];
        let mut intervals = vec![self.intervals[0]];
        let mut points = Vec::new();
        for i in 0..self.points.len() {
            let (p, next) = (self.points[i], self.intervals[i + 1]);
            if p == next && next == *intervals.last().unwrap() {
                continue;
            }
            cuts.push(self.cuts[i + 1].clone());
            points.push(p);
            intervals.push(next);
        }
        cuts.push(self.cuts.last().unwrap().clone());
        EdgeSteps { cuts, intervals, points }
    }
}

/// An lsc function `X \ v → ℕ ∪ {∞}` with finitely many steps, in
/// canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LscFunction<S = Rational> {
    tree: Arc<RootedTree>,
    edges: Vec<EdgeSteps<S>>,
    vertices: Vec<Rank>,
}

impl<S: Scalar> LscFunction<S> {
    /// Validating constructor. `vertices[root]` must be `None`, every other
    /// entry `Some`.
    pub fn new(tree: Arc<RootedTree>, edges: Vec<EdgeSteps<S>>, vertices: Vec<Option<Rank>>) -> Result<Self> {
        if edges.len() != tree.edge_count() || vertices.len() != tree.vertex_count() {
            return Err(Error::input("lsc function arity does not match its tree"));
        }
        for (k, st) in edges.iter().enumerate() {
            let m = st.cuts.len();
            if m < 2 || !st.cuts[0].is_zero() || !st.cuts[m - 1].is_one() || st.cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invariant("cuts", format!("edge {k}: cuts must increase strictly from 0 to 1")));
            }
            if st.intervals.len() != m - 1 || st.points.len() != m - 2 {
                return Err(Error::input(format!("edge {k}: value counts do not match the cuts")));
            }
            for i in 0..st.points.len() {
                if st.points[i] > st.intervals[i].min(st.intervals[i + 1]) {
                    return Err(Error::invariant(
                        "lsc",
                        format!("edge {k}: value {} at {} exceeds an adjacent side value", st.points[i], st.cuts[i + 1]),
                    ));
                }
            }
        }
        let mut vals = Vec::with_capacity(vertices.len());
        for (v, val) in vertices.into_iter().enumerate() {
            match (VertexId(v) == tree.root(), val) {
                (true, None) => vals.push(Rank::ZERO),
                (true, Some(_)) => return Err(Error::invariant("root_excluded", "the root carries a value")),
                (false, Some(r)) => vals.push(r),
                (false, None) => return Err(Error::input(format!("vertex `{}` has no value", tree.labels()[v]))),
            }
        }
        let f = LscFunction { tree, edges, vertices: vals };
        for v in 0..f.vertices.len() {
            let v = VertexId(v);
            if v != f.tree.root() && f.vertices[v.0] > f.side_min(v) {
                return Err(Error::invariant(
                    "lsc",
                    format!("vertex `{}`: value exceeds an adjacent side value", f.tree.labels()[v.0]),
                ));
            }
        }
        Ok(f.canonical())
    }

    fn canonical(mut self) -> Self {
        self.edges = self.edges.into_iter().map(EdgeSteps::canonical).collect();
        self
    }

    /// Smallest value on the edge germs at `v`.
    fn side_min(&self, v: VertexId) -> Rank {
        let t = &self.tree;
        let up = t.parent_edge(v).map(|e| *self.edges[e.0].intervals.last().unwrap());
        let down = t.out_edges(v).iter().map(|e| self.edges[e.0].intervals[0]);
        up.into_iter().chain(down).min().unwrap_or(Rank::ZERO)
    }

    /// Builds from per-edge cuts and a value oracle queried at interval
    /// midpoints, interior cuts and non-root vertices.
    fn build(
        tree: Arc<RootedTree>,
        cuts: Vec<Vec<S>>,
        at: impl Fn(EdgeId, &S) -> Rank,
        vertex: impl Fn(VertexId) -> Rank,
    ) -> Self {
        let edges = cuts
            .into_iter()
            .enumerate()
            .map(|(k, cuts)| {
                let e = EdgeId(k);
                let intervals = cuts.windows(2).map(|w| at(e, &S::midpoint(&w[0], &w[1]))).collect();
                let points = cuts[1..cuts.len() - 1].iter().map(|s| at(e, s)).collect();
                EdgeSteps { cuts, intervals, points }
            })
            .collect();
        let root = tree.root();
        let vertices = (0..tree.vertex_count())
            .map(|v| if VertexId(v) == root { Rank::ZERO } else { vertex(VertexId(v)) })
            .collect();
        LscFunction { tree, edges, vertices }.canonical()
    }

    pub fn zero(tree: Arc<RootedTree>) -> Self {
        Self::constant(tree, Rank::ZERO)
    }

    /// The constant `r` on `X \ v`.
    pub fn constant(tree: Arc<RootedTree>, r: Rank) -> Self {
        let cuts = vec![vec![S::zero(), S::one()]; tree.edge_count()];
        Self::build(tree, cuts, |_, _| r, |_| r)
    }

    /// `r · 𝟙_U`.
    pub fn indicator_times(set: &OpenSubset<S>, r: Rank) -> Self {
        let tree = set.tree().clone();
        let cuts = tree
            .edge_ids()
            .map(|e| {
                let mut c = vec![S::zero(), S::one()];
                c.extend(set.intervals(e).iter().flat_map(|(a, b)| [a.clone(), b.clone()]));
                c.sort();
                c.dedup();
                c
            })
            .collect();
        let pick = |inside: bool| if inside { r } else { Rank::ZERO };
        Self::build(tree, cuts, |e, s| pick(set.contains_on_edge(e, s)), |v| pick(set.contains_vertex(v)))
    }

    pub fn indicator(set: &OpenSubset<S>) -> Self {
        Self::indicator_times(set, Rank::new(1))
    }

    pub fn tree(&self) -> &Arc<RootedTree> {
        &self.tree
    }

    pub fn edge_steps(&self, e: EdgeId) -> &EdgeSteps<S> {
        &self.edges[e.0]
    }

    /// Value at a non-root vertex; `None` at the root.
    pub fn vertex_value(&self, v: VertexId) -> Option<Rank> {
        (v != self.tree.root()).then(|| self.vertices[v.0])
    }

    /// Value at a point; `None` at the root.
    pub fn value_at(&self, p: &TreePoint<S>) -> Option<Rank> {
        match self.tree.point_vertex(p) {
            Some(v) => self.vertex_value(v),
            None => Some(self.edges[p.edge().0].at(p.pos())),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if same_tree(&self.tree, &other.tree) {
            Ok(())
        } else {
            Err(Error::input("lsc functions live on different trees"))
        }
    }

    fn merged_cuts(&self, other: &Self) -> Vec<Vec<S>> {
        self.edges
            .iter()
            .zip(&other.edges)
            .map(|(a, b)| {
                let mut c: Vec<S> = a.cuts.iter().chain(&b.cuts).cloned().collect();
                c.sort();
                c.dedup();
                c
            })
            .collect()
    }

    /// Pointwise combination.
    pub fn zip(&self, other: &Self, op: impl Fn(Rank, Rank) -> Rank) -> Result<Self> {
        self.check_same(other)?;
        let cuts = self.merged_cuts(other);
        Ok(Self::build(
            self.tree.clone(),
            cuts,
            |e, s| op(self.edges[e.0].at(s), other.edges[e.0].at(s)),
            |v| op(self.vertices[v.0], other.vertices[v.0]),
        ))
    }

    /// Every pair of values over a common refinement.
    fn all_pairs(&self, other: &Self, pred: impl Fn(Rank, Rank) -> bool) -> Result<bool> {
        self.check_same(other)?;
        for (k, cuts) in self.merged_cuts(other).into_iter().enumerate() {
            let (a, b) = (&self.edges[k], &other.edges[k]);
            let mids = cuts.windows(2).map(|w| S::midpoint(&w[0], &w[1]));
            let inner = cuts[1..cuts.len() - 1].iter().cloned();
            for s in mids.chain(inner) {
                if !pred(a.at(&s), b.at(&s)) {
                    return Ok(false);
                }
            }
        }
        let root = self.tree.root();
        Ok((0..self.vertices.len()).all(|v| VertexId(v) == root || pred(self.vertices[v], other.vertices[v])))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        self.zip(other, Rank::max)
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        self.zip(other, Rank::min)
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.all_pairs(other, |a, b| a <= b)
    }

    fn values(&self) -> impl Iterator<Item = Rank> + '_ {
        let root = self.tree.root();
        self.edges
            .iter()
            .flat_map(|e| e.intervals.iter().chain(&e.points).copied())
            .chain(self.vertices.iter().enumerate().filter(move |(v, _)| VertexId(*v) != root).map(|(_, r)| *r))
    }

    pub fn is_zero(&self) -> bool {
        self.values().all(|r| r == Rank::ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(Rank::is_finite)
    }

    /// Supremum of the values.
    pub fn sup(&self) -> Rank {
        self.values().max().unwrap_or_default()
    }

    /// Largest finite value.
    pub fn max_finite(&self) -> u64 {
        self.values().filter_map(Rank::finite).max().unwrap_or(0)
    }

    /// `{f ≥ n}` for `n ≥ 1`.
    pub fn level_set(&self, n: u64) -> OpenSubset<S> {
        let masks: Vec<EdgeMask<S>> = self
            .edges
            .iter()
            .map(|st| EdgeMask {
                cuts: st.cuts.clone(),
                segments: st.intervals.iter().map(|r| r.at_least(n)).collect(),
                points: st.points.iter().map(|r| r.at_least(n)).collect(),
            })
            .collect();
        let root = self.tree.root();
        let vertices = (0..self.vertices.len()).map(|v| VertexId(v) != root && self.vertices[v].at_least(n)).collect();
        OpenSubset::from_masks(self.tree.clone(), &masks, vertices)
    }

    /// `f ≪ g`: `f` is finite and every `closure{f ≥ n}` avoids the root and
    /// sits inside `{g ≥ n}`.
    pub fn compactly_contained(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        if !self.is_finite() {
            return Ok(false);
        }
        for n in 1..=self.max_finite() {
            let u = self.level_set(n);
            if u.closure_contains_root() || !u.closure_within(&other.level_set(n)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Connected open sets `U_{i,j}` with `f = Σ 𝟙_{U_{i,j}}`; layer `i` is
    /// `{f ≥ i}` split into components.
    pub fn decompose(&self) -> Result<Vec<OpenSubset<S>>> {
        if !self.is_finite() {
            return Err(Error::UnsupportedDecomposition);
        }
        Ok((1..=self.max_finite()).flat_map(|n| self.level_set(n).pieces()).collect())
    }

    /// `Σ_i 𝟙_{U_i}`.
    pub fn sum_of_indicators(tree: Arc<RootedTree>, sets: &[OpenSubset<S>]) -> Result<Self> {
        sets.iter().try_fold(Self::zero(tree), |acc, u| acc.add(&Self::indicator(u)))
    }

    /// `x ↦ #{j : f_j(x) > t}`.
    pub fn rank_function(diag: &[PlFunction<S>], t: &S, tree: &Arc<RootedTree>) -> Result<Self> {
        diag.iter().try_fold(Self::zero(tree.clone()), |acc, f| {
            if !same_tree(f.tree(), tree) {
                return Err(Error::input("diagonal entry lives on another tree"));
            }
            acc.add(&Self::indicator(&f.superlevel(t)))
        })
    }

    /// Some `z` with `f ≪ z ≪ h`, built by fattening every `closure{f ≥ n}`
    /// by a uniform `δ`: half the smallest clearance to `X \ {h ≥ n}`.
    pub fn interpolate(&self, h: &Self) -> Result<Self> {
        if !self.compactly_contained(h)? {
            return Err(Error::Order { index: None, detail: "interpolation needs f ≪ h".into() });
        }
        let top = self.max_finite();
        let levels: Vec<OpenSubset<S>> = (1..=top).map(|n| self.level_set(n)).collect();
        let delta = levels
            .iter()
            .enumerate()
            .filter_map(|(i, u)| clearance(u, &h.level_set(i as u64 + 1)))
            .min()
            .map(|c| c.half());
        let Some(delta) = delta else { return Ok(Self::zero(self.tree.clone())) };
        levels.iter().try_fold(Self::zero(self.tree.clone()), |acc, u| match dist_to_closure(u) {
            Some(d) => acc.add(&Self::indicator(&d.sublevel(&delta))),
            None => Ok(acc),
        })
    }

    /// Every cut parameter of every edge.
    pub fn all_cuts(&self) -> impl Iterator<Item = &S> {
        self.edges.iter().flat_map(|e| e.cuts.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generator, hereditary_open};

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn interval() -> Arc<RootedTree> {
        Arc::new(RootedTree::interval())
    }

    /// `r · 𝟙_{(a, 1]}` on `[0, 1]`.
    fn tail(a: Rational, r: u64) -> LscFunction {
        let t = interval();
        let u = OpenSubset::new(t.clone(), vec![vec![(a, q(1, 1))]], vec![false, true]).unwrap();
        LscFunction::indicator_times(&u, Rank::new(r))
    }

    fn open_interval(a: Rational, b: Rational) -> OpenSubset {
        OpenSubset::new(interval(), vec![vec![(a, b)]], vec![false, false]).unwrap()
    }

    #[test]
    fn addition_examples() {
        let s = tail(q(1, 2), 1).add(&tail(q(1, 4), 1)).unwrap();
        let st = s.edge_steps(EdgeId(0));
        assert_eq!(st.cuts, vec![q(0, 1), q(1, 4), q(1, 2), q(1, 1)]);
        assert_eq!(st.intervals, vec![Rank::ZERO, Rank::new(1), Rank::new(2)]);
        assert_eq!(st.points, vec![Rank::ZERO, Rank::new(1)]);
        assert_eq!(s.vertex_value(VertexId(1)), Some(Rank::new(2)));
        let z = LscFunction::zero(interval());
        assert_eq!(s.add(&z).unwrap(), s);
        let inf = LscFunction::constant(interval(), Rank::Infinite);
        assert_eq!(inf.add(&tail(q(1, 2), 1)).unwrap(), inf);
    }

    #[test]
    fn order_examples() {
        assert!(tail(q(1, 2), 1).leq(&tail(q(1, 4), 1)).unwrap());
        assert!(!tail(q(1, 4), 1).leq(&tail(q(1, 2), 1)).unwrap());
        let t = Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap());
        let a = LscFunction::indicator(&hereditary_open(&t, EdgeId(0), &q(1, 3)).unwrap());
        let b = LscFunction::indicator(&hereditary_open(&t, EdgeId(0), &q(1, 4)).unwrap());
        assert!(a.leq(&b).unwrap());
    }

    #[test]
    fn compact_containment_examples() {
        let half = tail(q(1, 2), 1);
        let quarter = tail(q(1, 4), 1);
        assert!(half.compactly_contained(&quarter).unwrap());
        assert!(!half.compactly_contained(&half).unwrap());
        assert!(LscFunction::zero(interval()).compactly_contained(&half).unwrap());
        let inf: LscFunction = LscFunction::constant(interval(), Rank::Infinite);
        assert!(!inf.compactly_contained(&inf).unwrap());
        let two_mid = LscFunction::indicator_times(&open_interval(q(1, 4), q(3, 4)), Rank::new(2));
        assert!(two_mid.compactly_contained(&LscFunction::constant(interval(), Rank::new(2))).unwrap());
    }

    #[test]
    fn decomposition_examples() {
        let two = LscFunction::indicator(&open_interval(q(1, 4), q(1, 2)))
            .add(&LscFunction::indicator(&open_interval(q(3, 4), q(1, 1))))
            .unwrap();
        let parts = two.decompose().unwrap();
        assert_eq!(parts, vec![open_interval(q(1, 4), q(1, 2)), open_interval(q(3, 4), q(1, 1))]);
        let stair = tail(q(1, 2), 1).add(&tail(q(1, 4), 1)).unwrap();
        let layers = stair.decompose().unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].intervals(EdgeId(0)), &[(q(1, 4), q(1, 1))]);
        assert_eq!(layers[1].intervals(EdgeId(0)), &[(q(1, 2), q(1, 1))]);
        assert_eq!(LscFunction::sum_of_indicators(interval(), &layers).unwrap(), stair);
        assert!(LscFunction::<Rational>::zero(interval()).decompose().unwrap().is_empty());
        assert_eq!(LscFunction::<Rational>::constant(interval(), Rank::Infinite).decompose(), Err(Error::UnsupportedDecomposition));
    }

    #[test]
    fn rank_function_examples() {
        let i = interval();
        let ramp: PlFunction = generator(&i, EdgeId(0)).unwrap();
        assert_eq!(LscFunction::rank_function(std::slice::from_ref(&ramp), &q(1, 2), &i).unwrap(), tail(q(1, 2), 1));
        assert_eq!(LscFunction::rank_function(&[ramp.clone(), ramp.clone()], &q(1, 4), &i).unwrap(), tail(q(1, 4), 2));
        let double = PlFunction::new(i.clone(), vec![vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 1)), (q(1, 1), q(1, 1))]]).unwrap();
        let got = LscFunction::rank_function(&[ramp, double], &q(1, 2), &i).unwrap();
        assert_eq!(got, tail(q(1, 4), 1).add(&tail(q(1, 2), 1)).unwrap());
    }

    #[test]
    fn interpolation_examples() {
        let z = tail(q(1, 2), 1).interpolate(&tail(q(1, 4), 1)).unwrap();
        assert_eq!(z, tail(q(3, 8), 1));
        let zero = LscFunction::zero(interval());
        assert_eq!(zero.interpolate(&tail(q(1, 4), 1)).unwrap(), zero);
        let f = LscFunction::indicator(&open_interval(q(1, 2), q(3, 4))).add(&tail(q(3, 4), 2)).unwrap();
        let h = tail(q(1, 4), 1).add(&tail(q(1, 2), 1)).unwrap();
        assert!(f.compactly_contained(&h).is_ok());
        let f = tail(q(1, 2), 1).add(&tail(q(3, 4), 1)).unwrap();
        let z = f.interpolate(&h).unwrap();
        assert!(f.compactly_contained(&z).unwrap() && z.compactly_contained(&h).unwrap());
        assert!(matches!(h.interpolate(&f), Err(Error::Order { .. })));
    }

    #[test]
    fn lsc_violations_are_named() {
        let bad = LscFunction::<Rational>::new(
            interval(),
            vec![EdgeSteps { cuts: vec![q(0, 1), q(1, 2), q(1, 1)], intervals: vec![Rank::ZERO, Rank::ZERO], points: vec![Rank::new(1)] }],
            vec![None, Some(Rank::ZERO)],
        );
        assert!(matches!(bad, Err(Error::Invariant { invariant: "lsc", .. })));
        let vertex = LscFunction::<Rational>::new(
            interval(),
            vec![EdgeSteps { cuts: vec![q(0, 1), q(1, 1)], intervals: vec![Rank::ZERO], points: vec![] }],
            vec![None, Some(Rank::new(1))],
        );
        assert!(matches!(vertex, Err(Error::Invariant { invariant: "lsc", .. })));
    }
}
