//! Seeded random generators for trees, functions, maps and chains.
//! Everything is drawn from a ChaCha stream, so a seed fixes the corpus.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distance::dist_to_complement;
use crate::generators::hereditary_open;
use crate::lsc::{LscFunction, Rank};
use crate::metrics::{DiagonalHom, LevelFamily};
use crate::open_set::OpenSubset;
use crate::pl::PlFunction;
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint, VertexId};
use crate::tree_map::PlTreeMap;
use crate::Rational;

pub struct Corpus {
    rng: ChaCha8Rng,
    pub max_edges: usize,
    pub max_denom: i64,
}

impl Corpus {
    /// Trees up to 6 edges, denominators up to 64.
    pub fn new(seed: u64) -> Self {
        Self::with_bounds(seed, 6, 64)
    }

    pub fn with_bounds(seed: u64, max_edges: usize, max_denom: i64) -> Self {
        Corpus { rng: ChaCha8Rng::seed_from_u64(seed), max_edges: max_edges.max(1), max_denom: max_denom.max(2) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// Random tree with `lo..=hi` edges (capped by `max_edges`), each new
    /// vertex hung below a uniformly chosen earlier one.
    pub fn tree(&mut self, lo: usize, hi: usize) -> Arc<RootedTree> {
        let hi = hi.min(self.max_edges).max(1);
        let n = self.rng.gen_range(lo.clamp(1, hi)..=hi);
        let edges: Vec<(usize, usize)> = (1..=n).map(|v| (self.rng.gen_range(0..v), v)).collect();
        Arc::new(RootedTree::from_index_edges(n + 1, &edges, 0).expect("random attachment builds a tree"))
    }

    /// Rational in `[0, 1]`.
    pub fn unit(&mut self) -> Rational {
        let d = self.rng.gen_range(1..=self.max_denom);
        Rational::ratio(self.rng.gen_range(0..=d), d)
    }

    /// Rational in `(0, 1)`.
    pub fn open_unit(&mut self) -> Rational {
        let d = self.rng.gen_range(2..=self.max_denom);
        Rational::ratio(self.rng.gen_range(1..d), d)
    }

    /// `k` distinct sorted rationals in `(0, 1)`.
    fn interior_params(&mut self, k: usize) -> Vec<Rational> {
        let mut v: Vec<Rational> = (0..k).map(|_| self.open_unit()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn point(&mut self, tree: &RootedTree) -> TreePoint<Rational> {
        let e = EdgeId(self.rng.gen_range(0..tree.edge_count()));
        tree.point(e, self.unit()).expect("position in [0,1]")
    }

    /// Random PL function with values in `[0, 1]`, zero at the root when
    /// `vanish_at_root`.
    pub fn pl_function(&mut self, tree: &Arc<RootedTree>, vanish_at_root: bool) -> PlFunction<Rational> {
        let vertex: Vec<Rational> = (0..tree.vertex_count())
            .map(|v| if vanish_at_root && VertexId(v) == tree.root() { Rational::ratio(0, 1) } else { self.level() })
            .collect();
        let knots = tree
            .edge_ids()
            .map(|e| {
                let k = self.rng.gen_range(0..=2);
                let mut ks = vec![(Rational::ratio(0, 1), vertex[tree.init(e).0].clone())];
                for t in self.interior_params(k) {
                    ks.push((t, self.level()));
                }
                ks.push((Rational::ratio(1, 1), vertex[tree.term(e).0].clone()));
                ks
            })
            .collect();
        PlFunction::new(tree.clone(), knots).expect("random knots are valid")
    }

    /// A value in `[0, 1]` biased towards the endpoints, so plateaus at `0`
    /// and `1` are common.
    fn level(&mut self) -> Rational {
        match self.rng.gen_range(0..6) {
            0 => Rational::ratio(0, 1),
            1 => Rational::ratio(1, 1),
            _ => self.unit(),
        }
    }

    /// Random open subset of `X \ v`: a superlevel set, a hereditary set or
    /// a single interior interval.
    pub fn open_subset(&mut self, tree: &Arc<RootedTree>) -> OpenSubset<Rational> {
        match self.rng.gen_range(0..4) {
            0 | 1 => {
                let f = self.pl_function(tree, true);
                f.superlevel(&self.open_unit())
            }
            2 => {
                let e = EdgeId(self.rng.gen_range(0..tree.edge_count()));
                hereditary_open(tree, e, &self.open_unit()).expect("parameter in (0,1)")
            }
            _ => {
                let e = EdgeId(self.rng.gen_range(0..tree.edge_count()));
                let ps = self.interior_params(2);
                let mut intervals = vec![Vec::new(); tree.edge_count()];
                if ps.len() == 2 {
                    intervals[e.0].push((ps[0].clone(), ps[1].clone()));
                }
                OpenSubset::new(tree.clone(), intervals, vec![false; tree.vertex_count()]).expect("interior interval")
            }
        }
    }

    /// Sum of up to three random indicators; with probability `p_inf` one
    /// summand is weighted by `∞`.
    pub fn lsc(&mut self, tree: &Arc<RootedTree>, p_inf: f64) -> LscFunction<Rational> {
        let k = self.rng.gen_range(0..=3);
        let mut f = LscFunction::zero(tree.clone());
        for _ in 0..k {
            let u = self.open_subset(tree);
            let r = if self.coin(p_inf) { Rank::Infinite } else { Rank::new(self.rng.gen_range(1..=2)) };
            f = f.add(&LscFunction::indicator_times(&u, r)).expect("same tree");
        }
        f
    }

    /// `g ≪ f` obtained by shrinking every `{f ≥ n}` inward by one random
    /// `δ ∈ (0, 1/2]` (the levels stay nested).
    pub fn shrink(&mut self, f: &LscFunction<Rational>) -> LscFunction<Rational> {
        let delta = self.open_unit().half();
        let top = f.max_finite() + u64::from(!f.is_finite());
        let sets: Vec<OpenSubset<Rational>> =
            (1..=top).map(|n| dist_to_complement(&f.level_set(n)).superlevel(&delta)).collect();
        LscFunction::sum_of_indicators(f.tree().clone(), &sets).expect("same tree")
    }

    /// Random continuous map `Y → X`; sends the root to the root when
    /// `root_preserving`.
    pub fn tree_map(&mut self, y: &Arc<RootedTree>, x: &Arc<RootedTree>, root_preserving: bool) -> PlTreeMap<Rational> {
        let images: Vec<TreePoint<Rational>> = (0..y.vertex_count())
            .map(|v| {
                if root_preserving && VertexId(v) == y.root() {
                    x.root_point()
                } else if self.coin(0.2) {
                    let vs: Vec<usize> = (0..x.vertex_count()).collect();
                    x.vertex_point(VertexId(*vs.choose(&mut self.rng).expect("nonempty")))
                } else {
                    self.point(x)
                }
            })
            .collect();
        let waypoints = y
            .edge_ids()
            .map(|f| {
                let k = self.rng.gen_range(0..=2);
                let mut w = vec![(Rational::ratio(0, 1), images[y.init(f).0].clone())];
                for s in self.interior_params(k) {
                    w.push((s, self.point(x)));
                }
                w.push((Rational::ratio(1, 1), images[y.term(f).0].clone()));
                w
            })
            .collect();
        PlTreeMap::new(y.clone(), x.clone(), waypoints).expect("waypoints agree at shared vertices")
    }

    /// Diagonal homomorphism `C₀(X \ v) → C₀(Y \ w) ⊗ M_m` with random maps.
    pub fn hom(&mut self, x: &Arc<RootedTree>, y: &Arc<RootedTree>, m: usize, unital: bool) -> DiagonalHom<Rational> {
        let maps = (0..m.max(1)).map(|_| self.tree_map(y, x, !unital)).collect();
        DiagonalHom::new(x.clone(), y.clone(), maps, unital).expect("random maps are admissible")
    }

    /// A `≪`-decreasing chain `x_0 ≫ x_1 ≫ … ≫ x_n`: either the level
    /// family of a random stack sampled at increasing parameters, or
    /// iterated shrinking of a random finite function.
    pub fn chain(&mut self, tree: &Arc<RootedTree>, n: usize) -> Vec<LscFunction<Rational>> {
        if self.coin(0.6) {
            let k = self.rng.gen_range(1..=3);
            let stack = (0..k).map(|_| self.pl_function(tree, true)).collect();
            let fam = LevelFamily::new(tree.clone(), stack).expect("values in [0,1]");
            let mut params = vec![Rational::ratio(0, 1)];
            let denom = (4 * n as i64).max(self.max_denom);
            while params.len() < n + 1 {
                let t = Rational::ratio(self.rng.gen_range(1..denom), denom);
                if !params.contains(&t) {
                    params.push(t);
                }
            }
            params.sort();
            params.iter().map(|t| fam.sample(t)).collect()
        } else {
            let mut x = self.lsc(tree, 0.0);
            let mut out = vec![x.clone()];
            for _ in 0..n {
                x = self.shrink(&x);
                out.push(x.clone());
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_fix_the_corpus() {
        let mut a = Corpus::new(5);
        let mut b = Corpus::new(5);
        for _ in 0..5 {
            let t = a.tree(1, 6);
            assert_eq!(t, b.tree(1, 6));
            assert_eq!(a.lsc(&t, 0.1), b.lsc(&t, 0.1));
        }
    }

    #[test]
    fn generated_values_are_well_formed() {
        let mut c = Corpus::new(9);
        for _ in 0..20 {
            let x = c.tree(1, 6);
            let y = c.tree(1, 3);
            let f = c.lsc(&x, 0.0);
            assert!(c.shrink(&f).compactly_contained(&f).unwrap());
            let h = c.hom(&x, &y, 2, false);
            assert_eq!(h.multiplicity(), 2);
            let chain = c.chain(&y, 4);
            assert!(chain.windows(2).all(|w| w[1].compactly_contained(&w[0]).unwrap()));
        }
    }
}
