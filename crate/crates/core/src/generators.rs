//! The canonical generators `g_e`, their relations, and the hereditary open
//! sets `X_e^ε = {g_e > ε}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::open_set::OpenSubset;
use crate::pl::PlFunction;
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, VertexId};

/// `g_e`: ramp from `0` to `1` along `e`, `1` on every descendant edge and
/// `0` elsewhere.
pub fn generator<S: Scalar>(tree: &Arc<RootedTree>, e: EdgeId) -> Result<PlFunction<S>> {
    tree.check_edge(e)?;
    let knots = tree
        .edge_ids()
        .map(|f| {
            let (a, b) = if f == e {
                (S::zero(), S::one())
            } else if tree.edge_descends(f, e) {
                (S::one(), S::one())
            } else {
                (S::zero(), S::zero())
            };
            vec![(S::zero(), a), (S::one(), b)]
        })
        .collect();
    Ok(PlFunction::from_knots(tree.clone(), knots))
}

/// All generators, indexed by edge id.
pub fn generators<S: Scalar>(tree: &Arc<RootedTree>) -> Vec<PlFunction<S>> {
    tree.edge_ids().map(|e| generator(tree, e).expect("edge of the tree")).collect()
}

/// Decides the relations of a family `h_e` (one per edge, values in
/// `[0, 1]`): siblings have disjoint supports and `h_{e'} = 1` wherever
/// `h_{e''}` is positive for `e''` next to `e'`.
pub fn check_relations<S: Scalar>(family: &[PlFunction<S>], tree: &Arc<RootedTree>) -> Result<bool> {
    if family.len() != tree.edge_count() {
        return Err(Error::input(format!("{} functions for {} edges", family.len(), tree.edge_count())));
    }
    for (k, h) in family.iter().enumerate() {
        if !crate::pl::same_tree(h.tree(), tree) {
            return Err(Error::input(format!("function {k} lives on another tree")));
        }
        if h.min_value().is_negative() || h.max_value() > S::one() {
            return Err(Error::Domain(format!("function for edge {k} leaves [0,1]")));
        }
    }
    let supports: Vec<OpenSubset<S>> = family.iter().map(|h| h.superlevel(&S::zero())).collect();
    let below_one: Vec<OpenSubset<S>> = family.iter().map(|h| h.sublevel(&S::one())).collect();
    let root = tree.root();
    for e1 in tree.edge_ids() {
        for e2 in tree.edge_ids() {
            if e1 == e2 {
                continue;
            }
            let (h1, h2) = (&family[e1.0], &family[e2.0]);
            if tree.is_beside(e1, e2)?
                && (supports[e1.0].intersects(&supports[e2.0])
                    || (h1.root_value().is_positive() && h2.root_value().is_positive()))
                {
                    return Ok(false);
                }
            if tree.is_next_to(e1, e2)?
                && (supports[e2.0].intersects(&below_one[e1.0])
                    || (h2.vertex_value(root).is_positive() && h1.vertex_value(root) < S::one()))
                {
                    return Ok(false);
                }
        }
    }
    Ok(true)
}

/// `X_e^ε` for `0 < ε < 1`.
pub fn hereditary_open<S: Scalar>(tree: &Arc<RootedTree>, e: EdgeId, eps: &S) -> Result<OpenSubset<S>> {
    tree.check_edge(e)?;
    if !eps.is_positive() || *eps >= S::one() {
        return Err(Error::Domain(format!("hereditary parameter {eps} outside (0,1)")));
    }
    Ok(hereditary_open_at(tree, e, eps))
}

/// `X_e^ε` for `0 ≤ ε < 1`.
pub(crate) fn hereditary_open_at<S: Scalar>(tree: &Arc<RootedTree>, e: EdgeId, eps: &S) -> OpenSubset<S> {
    let intervals = tree
        .edge_ids()
        .map(|f| {
            if f == e {
                vec![(eps.clone(), S::one())]
            } else if tree.edge_descends(f, e) {
                vec![(S::zero(), S::one())]
            } else {
                Vec::new()
            }
        })
        .collect();
    let vertices = (0..tree.vertex_count())
        .map(|v| {
            let v = VertexId(v);
            v != tree.root() && tree.parent_edge(v).is_some_and(|p| p == e || tree.edge_descends(p, e))
        })
        .collect();
    OpenSubset::new(tree.clone(), intervals, vertices).expect("hereditary sets are open")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn v_tree() -> Arc<RootedTree> {
        Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
    }

    #[test]
    fn generator_shapes() {
        let i = Arc::new(RootedTree::interval());
        let g: PlFunction<Rational> = generator(&i, EdgeId(0)).unwrap();
        assert_eq!(g.knots(EdgeId(0)), &[(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))]);
        let t = v_tree();
        let g1: PlFunction<Rational> = generator(&t, EdgeId(0)).unwrap();
        assert_eq!(g1.vertex_value(VertexId(1)), q(1, 1));
        assert_eq!(g1.knots(EdgeId(1)), &[(q(0, 1), q(1, 1)), (q(1, 1), q(1, 1))]);
        let g2: PlFunction<Rational> = generator(&t, EdgeId(1)).unwrap();
        assert!(g2.knots(EdgeId(0)).iter().chain(g2.knots(EdgeId(2))).all(|(_, v)| v.is_zero()));
        assert_eq!(g2.root_value(), q(0, 1));
    }

    #[test]
    fn relations_hold_for_generators_and_sibling_swap() {
        let t = v_tree();
        let gens: Vec<PlFunction<Rational>> = generators(&t);
        assert!(check_relations(&gens, &t).unwrap());
        let swapped = vec![gens[0].clone(), gens[2].clone(), gens[1].clone()];
        assert!(check_relations(&swapped, &t).unwrap());
    }

    #[test]
    fn shrunk_parent_breaks_next_to() {
        let t = v_tree();
        let gens: Vec<PlFunction<Rational>> = generators(&t);
        let h1 = gens[0].minus_t_plus(&q(1, 4));
        assert_eq!(h1.max_value(), q(3, 4));
        let family = vec![h1, gens[1].clone(), gens[2].clone()];
        assert!(!check_relations(&family, &t).unwrap());
        let too_big = vec![gens[0].scale(&q(2, 1)), gens[1].clone(), gens[2].clone()];
        assert!(matches!(check_relations(&too_big, &t), Err(Error::Domain(_))));
    }

    #[test]
    fn hereditary_sets() {
        let i = Arc::new(RootedTree::interval());
        let h = hereditary_open(&i, EdgeId(0), &q(1, 2)).unwrap();
        assert_eq!(h.intervals(EdgeId(0)), &[(q(1, 2), q(1, 1))]);
        assert!(h.contains_vertex(VertexId(1)));
        let t = v_tree();
        let h1 = hereditary_open(&t, EdgeId(0), &q(1, 3)).unwrap();
        assert!(h1.is_connected());
        assert_eq!(h1.intervals(EdgeId(2)), &[(q(0, 1), q(1, 1))]);
        let h2 = hereditary_open(&t, EdgeId(1), &q(1, 2)).unwrap();
        assert!(h2.intervals(EdgeId(0)).is_empty() && h2.intervals(EdgeId(2)).is_empty());
        assert!(hereditary_open(&t, EdgeId(0), &q(1, 1)).is_err());
        assert!(hereditary_open(&t, EdgeId(0), &q(0, 1)).is_err());
        let g1: PlFunction<Rational> = generator(&t, EdgeId(0)).unwrap();
        assert_eq!(g1.superlevel(&q(1, 3)), h1);
    }
}
