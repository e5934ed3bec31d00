//! Approximate lifting of generator tables to diagonal homomorphisms:
//! interpolated chains, dyadic discretization, realization of profiles by
//! PL diagonal entries, exact-relation repair, and strand assembly.

use std::sync::Arc;

use crate::distance::{clearance, dist_to_complement};
use crate::error::{Error, Result};
use crate::lsc::{LscFunction, Rank};
use crate::metrics::{cu_of_hom, d_u_commutative, d_w_tree, total_class, DiagonalHom, GeneratorTable};
use crate::pl::{merged_cuts, same_tree, PlFunction};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree, TreePoint};
use crate::tree_map::{PlTreeMap, Waypoints};
use crate::Rational;

/// The level family `t ↦ [(a − t)_+]` of a positive element, known at
/// parameters `0 = t_0 < … < t_{r−1} < 1` and zero from `t = 1` on.
/// Consecutive values satisfy `P(t_{k+1}) ≪ P(t_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementProfile<S = Rational> {
    tree: Arc<RootedTree>,
    params: Vec<S>,
    values: Vec<LscFunction<S>>,
}

impl<S: Scalar> ElementProfile<S> {
    pub fn new(tree: Arc<RootedTree>, params: Vec<S>, values: Vec<LscFunction<S>>) -> Result<Self> {
        if params.len() != values.len() || params.is_empty() {
            return Err(Error::input("a profile needs one value per parameter, at least one"));
        }
        if !params[0].is_zero() || params.windows(2).any(|w| w[0] >= w[1]) || params.last().is_some_and(|t| *t >= S::one()) {
            return Err(Error::invariant("parameters", "parameters must increase from 0 and stay below 1"));
        }
        for (k, v) in values.iter().enumerate() {
            if !same_tree(v.tree(), &tree) {
                return Err(Error::input(format!("profile value {k} lives on another tree")));
            }
        }
        for k in 0..values.len() - 1 {
            if !values[k + 1].compactly_contained(&values[k])? {
                return Err(Error::Order {
                    index: Some(k),
                    detail: format!("P(t_{}) is not compactly contained in P(t_{k})", k + 1),
                });
            }
        }
        Ok(ElementProfile { tree, params, values })
    }

    pub fn zero(tree: Arc<RootedTree>) -> Self {
        let values = vec![LscFunction::zero(tree.clone())];
        ElementProfile { tree, params: vec![S::zero()], values }
    }

    pub fn tree(&self) -> &Arc<RootedTree> {
        &self.tree
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn values(&self) -> &[LscFunction<S>] {
        &self.values
    }

    /// `P(t_k)` for the largest `t_k ≤ t`, and `0` for `t ≥ 1`.
    pub fn sample(&self, t: &S) -> LscFunction<S> {
        if *t >= S::one() {
            return LscFunction::zero(self.tree.clone());
        }
        let k = self.params.partition_point(|p| p <= t);
        self.values[k.saturating_sub(1)].clone()
    }
}

/// Profile through a `≪`-chain `x_0 ≫ x_1 ≫ … ≫ x_n` at parameters
/// `k/n`: `P(0) = x_0` and `P(k/n) = interpolate(x_{k+1}, x_k)`, so that
/// `x_{k+1} ≪ P(k/n) ≪ x_k`.
pub fn interpolate_chain<S: Scalar>(xs: &[LscFunction<S>], n: usize) -> Result<ElementProfile<S>> {
    if n == 0 || xs.len() != n + 1 {
        return Err(Error::input(format!("a chain of length {n} needs {} elements, got {}", n + 1, xs.len())));
    }
    let tree = xs[0].tree().clone();
    for k in 0..n {
        if !xs[k + 1].compactly_contained(&xs[k])? {
            return Err(Error::Order { index: Some(k), detail: format!("x_{} is not compactly contained in x_{k}", k + 1) });
        }
    }
    let mut values = vec![xs[0].clone()];
    for k in 1..n {
        values.push(xs[k + 1].interpolate(&xs[k])?);
    }
    let params = (0..n).map(|k| S::ratio(k as i64, n as i64)).collect();
    ElementProfile::new(tree, params, values)
}

/// `2^big_n` as a scalar and as a count.
fn dyadic<S: Scalar>(big_n: u32) -> Result<(usize, S)> {
    let k = 1usize.checked_shl(big_n).filter(|_| big_n < 40).ok_or_else(|| Error::input("discretization depth too large"))?;
    Ok((k, S::from_i64(k as i64)))
}

/// One profile per edge of `X`, from the chain `x_k = F_e(k/K)` for
/// `k < K = 2^big_n` closed by `x_K = F_e((2K − 1)/(2K))`. Checks the
/// sandwich `x_{k+1} ≪ P(k/K) ≪ x_k` at every `k` and, at every edge,
/// `Σ_{e' next to e} P_{e'}(0) ≪ P_e((K − 1)/K)`.
pub fn discretize<S: Scalar>(alpha: &GeneratorTable<S>, big_n: u32) -> Result<Vec<ElementProfile<S>>> {
    if big_n == 0 {
        return Err(Error::input("discretization depth must be positive"));
    }
    let (k_count, k_s) = dyadic::<S>(big_n)?;
    let x = alpha.source();
    let y = alpha.target();
    let mut profiles = Vec::with_capacity(x.edge_count());
    for e in x.edge_ids() {
        let fam = alpha.family(e);
        let mut chain: Vec<LscFunction<S>> = (0..k_count).map(|k| fam.sample(&(S::from_i64(k as i64) / k_s.clone()))).collect();
        chain.push(fam.sample(&(S::from_i64(2 * k_count as i64 - 1) / (S::from_i64(2) * k_s.clone()))));
        let profile = interpolate_chain(&chain, k_count).map_err(|err| Error::InfeasibleDiscretization {
            edge: e,
            detail: format!("the level chain is not compactly decreasing: {err}"),
        })?;
        for k in 1..k_count {
            let p = &profile.values[k];
            if !chain[k + 1].compactly_contained(p)? || !p.compactly_contained(&chain[k])? {
                return Err(Error::InfeasibleDiscretization { edge: e, detail: format!("sandwich fails at k = {k}") });
            }
        }
        profiles.push(profile);
    }
    for e in x.edge_ids() {
        let below = x.next_edges(e).iter().try_fold(LscFunction::zero(y.clone()), |acc, f| acc.add(&profiles[f.0].values[0]))?;
        if !below.compactly_contained(profiles[e.0].values.last().expect("nonempty profile"))? {
            return Err(Error::InfeasibleDiscretization {
                edge: e,
                detail: "the edges next to it are not compactly contained in its top level".into(),
            });
        }
    }
    Ok(profiles)
}

/// Diagonal entries `f_1 ≥ … ≥ f_m` with `#{j : f_j > t_k} = P(t_k)` at
/// every parameter. Entry `j` is
/// `Σ_k (t_{k+1} − t_k) · min(1, d(·, Y \ L_j(k)) / c_k)` with
/// `L_j(k) = {P(t_k) ≥ j}`, `t_r = 1` and `c_k` the clearance of
/// `closure L_j(k+1)` in `L_j(k)`.
pub fn realize_profile<S: Scalar>(p: &ElementProfile<S>) -> Result<Vec<PlFunction<S>>> {
    if !p.values[0].is_finite() {
        return Err(Error::UnrealizableProfile { edge: None, detail: "P(0) takes the value ∞".into() });
    }
    let r = p.params.len();
    let mut bounds = p.params.clone();
    bounds.push(S::one());
    let mut entries = Vec::new();
    for j in 1..=p.values[0].max_finite() {
        let layers: Vec<_> = p.values.iter().map(|v| v.level_set(j)).collect();
        let mut ramps = Vec::with_capacity(r);
        for k in 0..r {
            if layers[k].is_empty() {
                break;
            }
            let step = bounds[k + 1].clone() - bounds[k].clone();
            let c = if k + 1 < r && !layers[k + 1].is_empty() {
                clearance(&layers[k + 1], &layers[k]).unwrap_or_else(S::one)
            } else {
                S::one()
            };
            let ramp = dist_to_complement(&layers[k]).map_values(std::slice::from_ref(&c), |v| {
                if *v >= c {
                    step.clone()
                } else {
                    step.clone() * v.clone() / c.clone()
                }
            });
            ramps.push(ramp);
        }
        entries.push(balanced_sum(p.tree.clone(), ramps)?);
    }
    PlFunction::sort_pointwise(&entries)
}

/// Sum by pairwise halving, so knot lists grow evenly.
fn balanced_sum<S: Scalar>(tree: Arc<RootedTree>, mut fs: Vec<PlFunction<S>>) -> Result<PlFunction<S>> {
    while fs.len() > 1 {
        let mut next = Vec::with_capacity(fs.len().div_ceil(2));
        let mut it = fs.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.add(&b)?,
                None => a,
            });
        }
        fs = next;
    }
    Ok(fs.pop().unwrap_or_else(|| PlFunction::zero(tree)))
}

/// Output of [`approximate_lift`]: the homomorphism and its certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift<S = Rational> {
    pub hom: DiagonalHom<S>,
    pub certificate: Certificate<S>,
}

/// Exactly recomputed `d_W` between the table and the lift's induced
/// table, with the requested `ε` and the discretization depths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate<S = Rational> {
    pub d_w: S,
    pub eps: S,
    pub big_n: u32,
    pub n: u32,
}

/// Smallest `n ≥ 1` with `1/2^{n−1} < eps`.
fn depth_for<S: Scalar>(eps: &S) -> Result<u32> {
    let mut n = 1u32;
    let mut bound = S::one();
    while bound >= *eps {
        n += 1;
        bound = bound.half();
        if n > 36 {
            return Err(Error::Domain(format!("eps = {eps} is too small")));
        }
    }
    Ok(n)
}

/// A homomorphism `φ` with `d_w_tree(α, Cu(φ)) < eps`, certified exactly.
pub fn approximate_lift<S: Scalar>(alpha: &GeneratorTable<S>, eps: &S) -> Result<Lift<S>> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let x = alpha.source().clone();
    let y = alpha.target().clone();
    if alpha.families().iter().any(|f| f.stack().iter().any(|g| !g.root_value().is_zero())) {
        return Err(Error::Compatibility("the table does not vanish at the target root".into()));
    }
    let m = match total_class(alpha).sup() {
        Rank::Finite(v) => (v as usize).max(1),
        Rank::Infinite => return Err(Error::Compatibility("total class is not bounded by a finite multiple of the unit".into())),
    };
    let n = depth_for(eps)?;
    let big_n = n + 2;
    let (k_count, k_s) = dyadic::<S>(big_n)?;
    let profiles = discretize(alpha, big_n)?;
    let top = S::from_i64(k_count as i64 - 1) / k_s.clone();
    let mut repaired = Vec::with_capacity(x.edge_count());
    for (e, p) in x.edge_ids().zip(&profiles) {
        let entries = realize_profile(p).map_err(|err| match err {
            Error::UnrealizableProfile { detail, .. } => Error::UnrealizableProfile { edge: Some(e), detail },
            other => other,
        })?;
        let c: Vec<PlFunction<S>> = entries
            .iter()
            .map(|f| f.map_values(std::slice::from_ref(&top), |v| if *v >= top { S::one() } else { v.clone() / top.clone() }))
            .collect();
        repaired.push(c);
    }
    let maps = assemble_strands(&x, &y, &repaired, m)?;
    let hom = DiagonalHom::new(x, y, maps, false)?;
    let d_w = d_w_tree(alpha, &cu_of_hom(&hom))?;
    if d_w >= *eps {
        return Err(Error::invariant("lift_certificate", format!("recomputed d_W = {d_w} is not below eps = {eps}")));
    }
    Ok(Lift { hom, certificate: Certificate { d_w, eps: eps.clone(), big_n, n } })
}

/// One moving point during a subinterval of a `Y` edge.
struct Element<S> {
    from: TreePoint<S>,
    to: TreePoint<S>,
}

/// Builds `m` continuous maps `λ_j : Y → X` with
/// `{g_e ∘ λ_j}_j = c_e` as multisets at every point, for exact-relation
/// stacks `c_e`, by path lifting along `Y` from the root.
fn assemble_strands<S: Scalar>(
    x: &Arc<RootedTree>,
    y: &Arc<RootedTree>,
    c: &[Vec<PlFunction<S>>],
    m: usize,
) -> Result<Vec<PlTreeMap<S>>> {
    let root: TreePoint<S> = x.root_point();
    let mut at_vertex: Vec<Option<Vec<TreePoint<S>>>> = vec![None; y.vertex_count()];
    at_vertex[y.root().0] = Some(vec![root.clone(); m]);
    let mut waypoints: Vec<Vec<Waypoints<S>>> = vec![vec![Vec::new(); y.edge_count()]; m];
    let vertex_of = |e: EdgeId| x.vertex_point::<S>(x.term(e));
    for &f in y.bfs_edges() {
        let mut pos = at_vertex[y.init(f).0].clone().expect("parent processed first");
        for (j, p) in pos.iter().enumerate() {
            waypoints[j][f.0].push((S::zero(), p.clone()));
        }
        let lists: Vec<&[(S, S)]> = c.iter().flatten().map(|g| g.knots(f)).collect();
        let cuts = merged_cuts(&lists, &[]);
        for w in cuts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mid = S::midpoint(a, b);
            let mut elements = Vec::new();
            let mut occupied = vec![0usize; x.edge_count()];
            let mut full = vec![0usize; x.edge_count()];
            for e in x.edge_ids() {
                for g in &c[e.0] {
                    let v = g.eval_edge(f, &mid);
                    if v.is_one() {
                        full[e.0] += 1;
                        occupied[e.0] += 1;
                    } else if v.is_positive() {
                        occupied[e.0] += 1;
                        elements.push(Element {
                            from: x.canonical(e, g.eval_edge(f, a)),
                            to: x.canonical(e, g.eval_edge(f, b)),
                        });
                    }
                }
            }
            for e in x.edge_ids() {
                let below: usize = x.next_edges(e).iter().map(|g| occupied[g.0]).sum();
                let idle = full[e.0].checked_sub(below).ok_or_else(|| {
                    Error::invariant("exact_relations", format!("edge {e} is full on {below} > {} levels", full[e.0]))
                })?;
                for _ in 0..idle {
                    elements.push(Element { from: vertex_of(e), to: vertex_of(e) });
                }
            }
            let at_root: usize = x.root_edges().iter().map(|e| occupied[e.0]).sum();
            let idle = m.checked_sub(at_root).ok_or_else(|| {
                Error::invariant("exact_relations", format!("{at_root} strands needed, multiplicity is {m}"))
            })?;
            for _ in 0..idle {
                elements.push(Element { from: root.clone(), to: root.clone() });
            }
            let mut used = vec![false; m];
            let mut next = pos.clone();
            for el in elements {
                let j = (0..m).find(|&j| !used[j] && pos[j] == el.from).ok_or_else(|| {
                    Error::invariant("continuity", format!("no strand at {:?} on target edge {f} at {a}", el.from))
                })?;
                used[j] = true;
                next[j] = el.to;
            }
            pos = next;
            for (j, p) in pos.iter().enumerate() {
                waypoints[j][f.0].push((b.clone(), p.clone()));
            }
        }
        let end = y.term(f);
        at_vertex[end.0] = Some(pos);
    }
    waypoints.into_iter().map(|w| PlTreeMap::new(y.clone(), x.clone(), w)).collect()
}

/// `φ_k = approximate_lift(α, 1/2^{k+2})` for `k = 1..=steps`, each paired
/// with `d_u_commutative(φ_k, φ_{k+1})`.
pub fn cauchy_driver<S: Scalar>(alpha: &GeneratorTable<S>, steps: usize) -> Result<Vec<(DiagonalHom<S>, S)>> {
    let mut eps = S::ratio(1, 8);
    let mut lifts = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        lifts.push(approximate_lift(alpha, &eps)?.hom);
        eps = eps.half();
    }
    let dists = lifts.windows(2).map(|w| d_u_commutative(&w[0], &w[1])).collect::<Result<Vec<S>>>()?;
    Ok(lifts.into_iter().zip(dists).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::LevelFamily;
    use crate::open_set::OpenSubset;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn interval() -> Arc<RootedTree> {
        Arc::new(RootedTree::interval())
    }

    fn v_tree() -> Arc<RootedTree> {
        Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
    }

    fn tail(a: Rational, r: u64) -> LscFunction {
        let u = OpenSubset::new(interval(), vec![vec![(a, q(1, 1))]], vec![false, true]).unwrap();
        LscFunction::indicator_times(&u, Rank::new(r))
    }

    fn path_hom(x: &Arc<RootedTree>, pts: Vec<(Rational, TreePoint<Rational>)>) -> DiagonalHom {
        let y = interval();
        let m = PlTreeMap::new(y.clone(), x.clone(), vec![pts]).unwrap();
        DiagonalHom::new(x.clone(), y, vec![m], false).unwrap()
    }

    fn doubling() -> DiagonalHom {
        let i = interval();
        path_hom(&i, vec![(q(0, 1), i.root_point()), (q(1, 2), i.point(EdgeId(0), q(1, 1)).unwrap()), (q(1, 1), i.point(EdgeId(0), q(1, 1)).unwrap())])
    }

    fn v_path() -> DiagonalHom {
        let t = v_tree();
        path_hom(&t, vec![(q(0, 1), t.root_point()), (q(1, 1), t.point(EdgeId(1), q(1, 1)).unwrap())])
    }

    #[test]
    fn chain_example_sandwiches() {
        let x0 = tail(q(0, 1), 2);
        let x1 = tail(q(1, 4), 1).add(&tail(q(1, 2), 1)).unwrap();
        let x2 = tail(q(3, 4), 1);
        let p = interpolate_chain(&[x0.clone(), x1.clone(), x2.clone()], 2).unwrap();
        assert_eq!(p.sample(&q(0, 1)), x0);
        let mid = p.sample(&q(1, 2));
        assert!(x2.compactly_contained(&mid).unwrap() && mid.compactly_contained(&x1).unwrap());
        let entries = realize_profile(&p).unwrap();
        assert_eq!(entries.len(), 2);
        for (t, v) in p.params().iter().zip(p.values()) {
            assert_eq!(&LscFunction::rank_function(&entries, t, &interval()).unwrap(), v);
        }
        let bad = interpolate_chain(&[x2.clone(), x0.clone(), x1], 2).unwrap_err();
        assert!(matches!(bad, Error::Order { index: Some(0), .. }));
        let zero: LscFunction = LscFunction::zero(interval());
        let z = interpolate_chain(&[zero.clone(), zero.clone(), zero.clone()], 2).unwrap();
        assert!(z.values().iter().all(LscFunction::is_zero));
        let one = interpolate_chain(&[x0.clone(), x2], 1).unwrap();
        assert_eq!(one.values(), &[x0]);
    }

    #[test]
    fn realizing_generator_towers() {
        let i = interval();
        let ids = GeneratorTable::new(
            i.clone(),
            i.clone(),
            vec![LevelFamily::new(i.clone(), vec![crate::generators::generator(&i, EdgeId(0)).unwrap(); 2]).unwrap()],
            false,
        )
        .unwrap();
        let profiles = discretize(&ids, 2).unwrap();
        let p = &profiles[0];
        for (k, v) in p.values().iter().enumerate().skip(1) {
            let lower = if k == 3 { tail(q(7, 8), 2) } else { tail(q(k as i64 + 1, 4), 2) };
            assert!(lower.compactly_contained(v).unwrap());
            assert!(v.compactly_contained(&tail(q(k as i64, 4), 2)).unwrap());
        }
        let entries = realize_profile(p).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0], entries[1]);
    }

    #[test]
    fn lifts_carry_certificates() {
        let alpha = cu_of_hom(&doubling());
        let lift = approximate_lift(&alpha, &q(1, 4)).unwrap();
        assert!(lift.certificate.d_w < q(1, 4));
        assert_eq!((lift.certificate.n, lift.certificate.big_n), (4, 6));
        assert_eq!(d_w_tree(&alpha, &cu_of_hom(&lift.hom)).unwrap(), lift.certificate.d_w);

        let i = interval();
        let zero = GeneratorTable::zero(i.clone(), i.clone());
        let lift = approximate_lift(&zero, &q(1, 4)).unwrap();
        assert_eq!(lift.certificate.d_w, q(0, 1));
        assert!(lift.hom.maps().iter().all(|m| m.eval_edge(EdgeId(0), &q(1, 2)) == i.root_point()));

        let alpha = cu_of_hom(&v_path());
        let lift = approximate_lift(&alpha, &q(1, 16)).unwrap();
        assert!(lift.certificate.d_w < q(1, 16));
        let profiles = discretize(&alpha, 3).unwrap();
        assert!(!profiles[1].values()[0].level_set(1).intersects(&profiles[2].values()[0].level_set(1)));
    }

    #[test]
    fn cauchy_sequences_meet_the_bound() {
        let i = interval();
        let alpha = cu_of_hom(&DiagonalHom::new(i.clone(), i.clone(), vec![PlTreeMap::<Rational>::identity(i.clone())], false).unwrap());
        let seq = cauchy_driver(&alpha, 3).unwrap();
        assert_eq!(seq.len(), 3);
        for (k, (_, d)) in seq.iter().enumerate() {
            assert!(*d <= q(4, 1 << (k + 1)));
        }
        let zero = cauchy_driver(&GeneratorTable::<Rational>::zero(i.clone(), i), 2).unwrap();
        assert!(zero.iter().all(|(_, d)| d == &q(0, 1)));
    }
}
