//! Definition-level oracles, kept independent of the fast decision
//! procedures they check.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::distance::dist_to_complement;
use crate::error::Result;
use crate::lsc::{LscFunction, Rank};
use crate::scalar::Scalar;

/// `f ≪ g` by the definition, against the exhausting chain `g_k ↑ g` that
/// shrinks every `{g ≥ n}` inward by `1/k` and caps at `k`. The chain is
/// increasing, so testing the single stage `k = K` decides all `k ≤ K`;
/// `K` exceeds both `max f` and the lcm of all cut denominators, which
/// bounds every positive clearance from below.
pub fn cc_oracle<S: Scalar>(f: &LscFunction<S>, g: &LscFunction<S>) -> Result<bool> {
    f.leq(g)?;
    if !f.is_finite() {
        return Ok(false);
    }
    let lcm = f
        .all_cuts()
        .chain(g.all_cuts())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.to_big().denom()));
    let k_big = std::cmp::max(lcm + BigInt::one(), BigInt::from(f.max_finite()));
    let k = k_big.to_u64().unwrap_or(u64::MAX);
    let radius = S::from_big(&BigRational::new(BigInt::one(), k_big)).expect("radius fits the scalar");
    let top = g.max_finite().min(k);
    let shrunk = |n: u64| dist_to_complement(&g.level_set(n)).superlevel(&radius);
    let mut stage = LscFunction::zero(f.tree().clone());
    for n in 1..=top {
        stage = stage.add(&LscFunction::indicator(&shrunk(n)))?;
    }
    if !g.is_finite() && k > top {
        stage = stage.add(&LscFunction::indicator_times(&shrunk(top + 1), Rank::new(k - top)))?;
    }
    f.leq(&stage)
}

/// `d_W` between two families `t ↦ F(t)`, `t ↦ G(t)` by the definition,
/// restricted to the grid `{i / denom}`: the least grid `r` with
/// `F(t + r) ≤ G(t)` and `G(t + r) ≤ F(t)` at every grid `t ∈ [0, 1]`,
/// located by bisection. Families are `0` beyond `t = 1`.
pub fn d_w_grid<S: Scalar>(
    f: impl Fn(&S) -> LscFunction<S>,
    g: impl Fn(&S) -> LscFunction<S>,
    denom: i64,
) -> Result<S> {
    let fs: Vec<LscFunction<S>> = (0..=denom).map(|i| f(&S::ratio(i, denom))).collect();
    let gs: Vec<LscFunction<S>> = (0..=denom).map(|i| g(&S::ratio(i, denom))).collect();
    let zero = LscFunction::zero(fs[0].tree().clone());
    let at = |v: &Vec<LscFunction<S>>, i: usize| if i < v.len() { v[i].clone() } else { zero.clone() };
    let feasible = |r: usize| -> Result<bool> {
        for i in 0..=denom as usize {
            if !at(&fs, i + r).leq(&gs[i])? || !at(&gs, i + r).leq(&fs[i])? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let (mut lo, mut hi) = (0usize, denom as usize + 1);
    if feasible(0)? {
        return Ok(S::zero());
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(S::ratio(hi as i64, denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::open_set::OpenSubset;
    use crate::tree::RootedTree;
    use crate::Rational;
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn tail(a: Rational, r: u64) -> LscFunction {
        let t = Arc::new(RootedTree::interval());
        let u = OpenSubset::new(t, vec![vec![(a, q(1, 1))]], vec![false, true]).unwrap();
        LscFunction::indicator_times(&u, Rank::new(r))
    }

    #[test]
    fn oracle_agrees_on_the_worked_pairs() {
        let (half, quarter) = (tail(q(1, 2), 1), tail(q(1, 4), 1));
        assert!(cc_oracle(&half, &quarter).unwrap());
        assert!(!cc_oracle(&half, &half).unwrap());
        let t = Arc::new(RootedTree::interval());
        let inf = LscFunction::constant(t.clone(), Rank::Infinite);
        assert!(!cc_oracle(&inf, &inf).unwrap());
        let mid = OpenSubset::new(t.clone(), vec![vec![(q(1, 4), q(3, 4))]], vec![false, false]).unwrap();
        let two_mid = LscFunction::indicator_times(&mid, Rank::new(2));
        assert!(cc_oracle(&two_mid, &tail(q(0, 1), 2)).unwrap());
        assert!(cc_oracle(&two_mid, &inf).unwrap());
    }

    #[test]
    fn grid_distance_of_a_unit_shift() {
        let f = |t: &Rational| if *t < q(1, 1) { tail(t.clone(), 1) } else { tail(q(0, 1), 0) };
        let g = |t: &Rational| if *t < q(1, 1) { tail(t.clone(), 1) } else { tail(q(0, 1), 0) };
        assert_eq!(d_w_grid(f, g, 50).unwrap(), q(0, 1));
    }
}
