//! Distance functions to points and to open or closed subsets, as PL
//! functions.

use std::sync::Arc;

use crate::open_set::OpenSubset;
use crate::pl::{merged_cuts, KnotCursor, PlFunction};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint};

/// `x ↦ d(x, p)`.
pub fn point_distance<S: Scalar>(tree: &Arc<RootedTree>, p: &TreePoint<S>) -> PlFunction<S> {
    let knots = tree
        .edge_ids()
        .map(|e| {
            let pos = p.pos();
            if p.edge() == e && pos.is_positive() && *pos < S::one() {
                return vec![(S::zero(), pos.clone()), (pos.clone(), S::zero()), (S::one(), S::one() - pos.clone())];
            }
            let a = tree.distance(&tree.vertex_point(tree.init(e)), p);
            let b = tree.distance(&tree.vertex_point(tree.term(e)), p);
            let turn = (S::one() + b.clone() - a.clone()).half();
            vec![(S::zero(), a.clone()), (turn.clone(), turn + a), (S::one(), b)]
        })
        .collect();
    PlFunction::from_knots(tree.clone(), knots)
}

/// `x ↦ min_p d(x, p)`; `None` for an empty point set. On each edge this
/// is the distance to the nearest of the positions of points on it and two
/// virtual positions `−min_p d(init, p)` and `1 + min_p d(term, p)`.
pub fn points_distance<S: Scalar>(tree: &Arc<RootedTree>, points: &[TreePoint<S>]) -> Option<PlFunction<S>> {
    if points.is_empty() {
        return None;
    }
    let nearest = |v| points.iter().map(|p| tree.distance(&tree.vertex_point(v), p)).min().expect("nonempty");
    let knots = tree
        .edge_ids()
        .map(|e| {
            let mut q: Vec<S> = points.iter().filter(|p| p.edge() == e).map(|p| p.pos().clone()).collect();
            q.push(-nearest(tree.init(e)));
            q.push(S::one() + nearest(tree.term(e)));
            q.sort();
            q.dedup();
            let mut params = vec![S::zero(), S::one()];
            params.extend(q.iter().filter(|t| t.is_positive() && **t < S::one()).cloned());
            params.extend(q.windows(2).map(|w| S::midpoint(&w[0], &w[1])).filter(|t| t.is_positive() && *t < S::one()));
            params.sort();
            params.dedup();
            params
                .into_iter()
                .map(|t| {
                    let i = q.partition_point(|x| *x <= t);
                    let right = q.get(i).map(|x| x.clone() - t.clone());
                    let left = i.checked_sub(1).map(|j| t.clone() - q[j].clone());
                    let d = match (left, right) {
                        (Some(a), Some(b)) => a.min(b),
                        (Some(a), None) => a,
                        (None, Some(b)) => b,
                        (None, None) => unreachable!("q is nonempty"),
                    };
                    (t, d)
                })
                .collect()
        })
        .collect();
    Some(PlFunction::from_knots(tree.clone(), knots))
}

/// Replaces the function by `0` at every point where `keep` fails, after
/// refining at the endpoints of `set`.
fn zero_where<S: Scalar>(f: &PlFunction<S>, set: &OpenSubset<S>, keep: impl Fn(EdgeId, &S) -> bool) -> PlFunction<S> {
    let knots = f
        .tree()
        .edge_ids()
        .map(|e| {
            let ends: Vec<S> = set.intervals(e).iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
            let k = f.knots(e);
            let mut c = KnotCursor::new(k);
            merged_cuts(&[k], &ends)
                .into_iter()
                .map(|t| {
                    let v = c.eval(&t);
                    let v = if keep(e, &t) { v } else { S::zero() };
                    (t, v)
                })
                .collect()
        })
        .collect();
    PlFunction::from_knots(f.tree().clone(), knots)
}

/// `x ↦ d(x, X \ U)` for an open `U` avoiding the root.
pub fn dist_to_complement<S: Scalar>(set: &OpenSubset<S>) -> PlFunction<S> {
    let tree = set.tree();
    match points_distance(tree, &set.boundary_points()) {
        None => PlFunction::zero(tree.clone()),
        Some(d) => zero_where(&d, set, |e, t| set.contains_on_edge(e, t)),
    }
}

/// `x ↦ d(x, closure U)`; `None` when `U` is empty.
pub fn dist_to_closure<S: Scalar>(set: &OpenSubset<S>) -> Option<PlFunction<S>> {
    if set.is_empty() {
        return None;
    }
    let d = points_distance(set.tree(), &set.boundary_points())?;
    Some(zero_where(&d, set, |e, t| !set.closure_contains_on_edge(e, t)))
}

/// Distance from `closure U` to `X \ V`, assuming `closure U ⊆ V`;
/// `None` when `U` is empty.
pub fn clearance<S: Scalar>(inner: &OpenSubset<S>, outer: &OpenSubset<S>) -> Option<S> {
    let tree = inner.tree();
    let a = inner.boundary_points();
    let b = outer.boundary_points();
    a.iter().flat_map(|p| b.iter().map(move |q| tree.distance(p, q))).min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::hereditary_open;
    use crate::tree::VertexId;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn v_tree() -> Arc<RootedTree> {
        Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
    }

    #[test]
    fn point_distance_matches_geodesics() {
        let t = v_tree();
        let p = t.point(EdgeId(1), q(1, 3)).unwrap();
        let d = point_distance(&t, &p);
        for e in t.edge_ids() {
            for i in 0..=12 {
                let x = t.point(e, q(i, 12)).unwrap();
                assert_eq!(d.eval(&x), t.distance(&x, &p));
            }
        }
    }

    #[test]
    fn distance_to_complement_of_a_hereditary_set() {
        let t = v_tree();
        let u = hereditary_open(&t, EdgeId(0), &q(1, 2)).unwrap();
        let d = dist_to_complement(&u);
        assert_eq!(d.vertex_value(VertexId(2)), q(3, 2));
        assert_eq!(d.eval_edge(EdgeId(0), &q(1, 4)), q(0, 1));
        let c = dist_to_closure(&u).unwrap();
        assert_eq!(c.root_value(), q(1, 2));
        assert_eq!(c.vertex_value(VertexId(3)), q(0, 1));
        let w = hereditary_open(&t, EdgeId(0), &q(1, 4)).unwrap();
        assert_eq!(clearance(&u, &w), Some(q(1, 4)));
    }
}
