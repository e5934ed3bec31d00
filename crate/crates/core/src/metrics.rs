//! Generator tables of Cuntz morphisms, diagonal homomorphisms, and the
//! `d_W` / `d_U` distances.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::generators::{generators, hereditary_open_at};
use crate::lsc::{LscFunction, Rank};
use crate::pl::{merged_cuts, same_tree, PlFunction};
use crate::scalar::Scalar;
use crate::tree::{EdgeId, RootedTree};
use crate::tree_map::PlTreeMap;
use crate::Rational;

/// A level family `t ↦ F(t) = Σ_n 𝟙{φ_n > t}` given by a pointwise
/// decreasing stack `φ_1 ≥ φ_2 ≥ …` of PL functions with values in
/// `[0, 1]`. Identically zero entries are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelFamily<S = Rational> {
    target: Arc<RootedTree>,
    stack: Vec<PlFunction<S>>,
}

impl<S: Scalar> LevelFamily<S> {
    /// Sorts the entries pointwise; values must lie in `[0, 1]`.
    pub fn new(target: Arc<RootedTree>, entries: Vec<PlFunction<S>>) -> Result<Self> {
        for (j, f) in entries.iter().enumerate() {
            if !same_tree(f.tree(), &target) {
                return Err(Error::input(format!("stack entry {j} lives on another tree")));
            }
            if f.min_value().is_negative() || f.max_value() > S::one() {
                return Err(Error::Domain(format!("stack entry {j} leaves [0,1]")));
            }
        }
        let mut stack = PlFunction::sort_pointwise(&entries)?;
        stack.retain(|f| !f.is_zero());
        Ok(LevelFamily { target, stack })
    }

    pub fn zero(target: Arc<RootedTree>) -> Self {
        LevelFamily { target, stack: Vec::new() }
    }

    pub fn target(&self) -> &Arc<RootedTree> {
        &self.target
    }

    pub fn stack(&self) -> &[PlFunction<S>] {
        &self.stack
    }

    /// `F(t)`.
    pub fn sample(&self, t: &S) -> LscFunction<S> {
        LscFunction::rank_function(&self.stack, t, &self.target).expect("stack lives on the target")
    }

    /// Every value the stack takes at a breakpoint, i.e. every `t` at which
    /// the family can change combinatorially.
    pub fn critical_values(&self) -> Vec<S> {
        let mut v: Vec<S> = self.stack.iter().flat_map(|f| f.critical_values()).collect();
        v.push(S::zero());
        v.sort();
        v.dedup();
        v
    }

    /// The family of `(1 − g − t)_+` classes from the same maps: entries
    /// `1 − φ_n`, re-sorted. Only meaningful for unital data.
    pub fn complement(&self, multiplicity: usize) -> Result<Self> {
        let one = PlFunction::constant(self.target.clone(), S::one());
        let mut entries: Vec<PlFunction<S>> = self.stack.iter().map(|f| f.map_values(&[], |v| S::one() - v.clone())).collect();
        while entries.len() < multiplicity {
            entries.push(one.clone());
        }
        Self::new(self.target.clone(), entries)
    }
}

/// `d_W` between two level families: the least `r` with `F(t + r) ≤ G(t)`
/// and `G(t + r) ≤ F(t)` for all `t ≥ 0`. For stacks this is
/// `max_n ‖φ_n − ψ_n‖_∞` with the shorter stack padded by zeros.
pub fn d_w_interval<S: Scalar>(f: &LevelFamily<S>, g: &LevelFamily<S>) -> Result<S> {
    if !same_tree(&f.target, &g.target) {
        return Err(Error::input("level families have different target trees"));
    }
    let zero = PlFunction::zero(f.target.clone());
    let n = f.stack.len().max(g.stack.len());
    let mut best = S::zero();
    for i in 0..n {
        let a = f.stack.get(i).unwrap_or(&zero);
        let b = g.stack.get(i).unwrap_or(&zero);
        best = S::max_of(&best, &a.sup_norm_diff(b)?);
    }
    Ok(best)
}

/// Points at which piecewise-linear data on `tree` must be probed to decide
/// a pointwise predicate: all merged knots and the midpoints between them.
fn probe_points<S: Scalar>(tree: &RootedTree, fns: &[&PlFunction<S>]) -> Vec<(EdgeId, S)> {
    let mut out = Vec::new();
    for e in tree.edge_ids() {
        let lists: Vec<&[(S, S)]> = fns.iter().map(|f| f.knots(e)).collect();
        let cuts = merged_cuts(&lists, &[]);
        for w in cuts.windows(2) {
            out.push((e, w[0].clone()));
            out.push((e, S::midpoint(&w[0], &w[1])));
        }
        out.push((e, S::one()));
    }
    out
}

/// A Cuntz morphism `Cu(C₀(X \ v)) → Cu(C₀(Y \ w))` encoded by one level
/// family per edge of `X`: `F_e(t) = α[(g_e − t)_+]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorTable<S = Rational> {
    source: Arc<RootedTree>,
    target: Arc<RootedTree>,
    families: Vec<LevelFamily<S>>,
    unital: bool,
}

impl<S: Scalar> GeneratorTable<S> {
    /// Validating constructor. Unless `unital`, every entry vanishes at the
    /// root of `Y`. Vertex compatibility is checked pointwise: at every
    /// `y`, `#{n : φ^e_n(y) = 1} ≥ Σ_{e' next to e} #{n : φ^{e'}_n(y) > 0}`,
    /// which is `Σ_{e'} F_{e'}(0) ≤ F_e(t)` for all `t < 1`.
    pub fn new(
        source: Arc<RootedTree>,
        target: Arc<RootedTree>,
        families: Vec<LevelFamily<S>>,
        unital: bool,
    ) -> Result<Self> {
        if families.len() != source.edge_count() {
            return Err(Error::input(format!(
                "table has {} families, source has {} edges",
                families.len(),
                source.edge_count()
            )));
        }
        for (k, fam) in families.iter().enumerate() {
            if !same_tree(fam.target(), &target) {
                return Err(Error::input(format!("family {k} lives on another target")));
            }
            if !unital && fam.stack.iter().any(|f| !f.root_value().is_zero()) {
                return Err(Error::invariant("root_zero", format!("family {k} does not vanish at the target root")));
            }
        }
        let table = GeneratorTable { source, target, families, unital };
        table.check_vertex_compatibility()?;
        Ok(table)
    }

    fn check_vertex_compatibility(&self) -> Result<()> {
        let x = &self.source;
        for e in x.edge_ids() {
            let next = x.next_edges(e);
            if next.is_empty() {
                continue;
            }
            let mut fns: Vec<&PlFunction<S>> = self.families[e.0].stack.iter().collect();
            for &f in next {
                fns.extend(self.families[f.0].stack.iter());
            }
            for (ey, s) in probe_points(&self.target, &fns) {
                let full = self.families[e.0].stack.iter().filter(|f| f.eval_edge(ey, &s).is_one()).count();
                let below: usize =
                    next.iter().map(|f| self.families[f.0].stack.iter().filter(|g| g.eval_edge(ey, &s).is_positive()).count()).sum();
                if below > full {
                    return Err(Error::invariant(
                        "vertex_compatibility",
                        format!("edge {e}: edges next to it carry {below} > {full} levels at target edge {ey}, position {s}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn zero(source: Arc<RootedTree>, target: Arc<RootedTree>) -> Self {
        let families = vec![LevelFamily::zero(target.clone()); source.edge_count()];
        GeneratorTable { source, target, families, unital: false }
    }

    pub fn source(&self) -> &Arc<RootedTree> {
        &self.source
    }

    pub fn target(&self) -> &Arc<RootedTree> {
        &self.target
    }

    pub fn family(&self, e: EdgeId) -> &LevelFamily<S> {
        &self.families[e.0]
    }

    pub fn families(&self) -> &[LevelFamily<S>] {
        &self.families
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// Largest stack height over all edges.
    pub fn height(&self) -> usize {
        self.families.iter().map(|f| f.stack.len()).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if same_tree(&self.source, &other.source) && same_tree(&self.target, &other.target) {
            Ok(())
        } else {
            Err(Error::input("tables have different source or target trees"))
        }
    }
}

/// `α[s_X]`: the supremum over `ε ↓ 0` of `Σ_{root edges e} F_e(ε)`, which
/// for right-normalized families is `Σ_e F_e(0)`.
pub fn total_class<S: Scalar>(alpha: &GeneratorTable<S>) -> LscFunction<S> {
    alpha.source.root_edges().iter().fold(LscFunction::zero(alpha.target.clone()), |acc, e| {
        acc.add(&alpha.families[e.0].sample(&S::zero())).expect("same target")
    })
}

/// Applies `α` to a finite sum of hereditary indicators `𝟙_{X_e^ε}`.
pub fn evaluate<S: Scalar>(alpha: &GeneratorTable<S>, f: &LscFunction<S>) -> Result<LscFunction<S>> {
    if !same_tree(f.tree(), &alpha.source) {
        return Err(Error::input("function does not live on the table's source"));
    }
    let pieces = f.decompose().map_err(|_| Error::UnsupportedEvaluation("the function takes the value ∞".into()))?;
    let x = &alpha.source;
    let mut out = LscFunction::zero(alpha.target.clone());
    for u in pieces {
        let boundary = u.boundary_points();
        let candidate = match boundary.as_slice() {
            [b] => match x.point_vertex(b) {
                None => Some((b.edge(), b.pos().clone())),
                Some(v) => x.out_edges(v).iter().find(|e| !u.intervals(**e).is_empty()).map(|&e| (e, S::zero())),
            },
            _ => None,
        };
        let (e, eps) = candidate
            .filter(|(e, eps)| hereditary_open_at(x, *e, eps) == u)
            .ok_or_else(|| Error::UnsupportedEvaluation("a component is not a hereditary open set X_e^ε".into()))?;
        out = out.add(&alpha.families[e.0].sample(&eps))?;
    }
    Ok(out)
}

/// `max_e d_w_interval(F_e, G_e)`.
pub fn d_w_tree<S: Scalar>(alpha: &GeneratorTable<S>, beta: &GeneratorTable<S>) -> Result<S> {
    alpha.check_compatible(beta)?;
    alpha.families.iter().zip(&beta.families).try_fold(S::zero(), |acc, (f, g)| Ok(S::max_of(&acc, &d_w_interval(f, g)?)))
}

/// A homomorphism `C₀(X \ v) → C₀(Y \ w) ⊗ M_m`, `f ↦ diag(f ∘ λ_1, …,
/// f ∘ λ_m)`. Unless `unital`, every `λ_j` sends `w` to `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagonalHom<S = Rational> {
    source: Arc<RootedTree>,
    target: Arc<RootedTree>,
    maps: Vec<PlTreeMap<S>>,
    unital: bool,
}

impl<S: Scalar> DiagonalHom<S> {
    /// `source` is the algebra's tree `X`, `target` the codomain tree `Y`;
    /// each map runs `Y → X`.
    pub fn new(source: Arc<RootedTree>, target: Arc<RootedTree>, maps: Vec<PlTreeMap<S>>, unital: bool) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::input("a diagonal homomorphism needs multiplicity ≥ 1"));
        }
        for (j, m) in maps.iter().enumerate() {
            if !same_tree(m.source(), &target) || !same_tree(m.target(), &source) {
                return Err(Error::input(format!("eigenvalue map {j} does not run Y → X")));
            }
            if !unital && !m.preserves_root() {
                return Err(Error::invariant("root_compatibility", format!("eigenvalue map {j} does not send w to v")));
            }
        }
        Ok(DiagonalHom { source, target, maps, unital })
    }

    /// The homomorphism with every map constantly at `v`.
    pub fn zero(source: Arc<RootedTree>, target: Arc<RootedTree>, multiplicity: usize) -> Self {
        let c = PlTreeMap::constant(target.clone(), source.clone(), source.root_point());
        DiagonalHom { source, target, maps: vec![c; multiplicity.max(1)], unital: false }
    }

    pub fn source(&self) -> &Arc<RootedTree> {
        &self.source
    }

    pub fn target(&self) -> &Arc<RootedTree> {
        &self.target
    }

    pub fn maps(&self) -> &[PlTreeMap<S>] {
        &self.maps
    }

    pub fn multiplicity(&self) -> usize {
        self.maps.len()
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// Diagonal entries of the image of `f`.
    pub fn apply(&self, f: &PlFunction<S>) -> Result<Vec<PlFunction<S>>> {
        self.maps.iter().map(|m| m.pull_back(f)).collect()
    }

    /// Precomposes every eigenvalue map with an automorphism of `Y`.
    pub fn precompose_automorphism(&self, perm: &[EdgeId]) -> Result<Self> {
        let maps = self.maps.iter().map(|m| m.precompose_automorphism(perm)).collect::<Result<_>>()?;
        Ok(DiagonalHom { maps, ..self.clone() })
    }
}

/// The induced table: `F_e(t) = rank((φ(g_e) − t)_+)`.
pub fn cu_of_hom<S: Scalar>(phi: &DiagonalHom<S>) -> GeneratorTable<S> {
    let families = generators(&phi.source)
        .iter()
        .map(|g| LevelFamily::new(phi.target.clone(), phi.apply(g).expect("maps land in X")).expect("values in [0,1]"))
        .collect();
    GeneratorTable { source: phi.source.clone(), target: phi.target.clone(), families, unital: phi.unital }
}

fn check_homs<S: Scalar>(phi: &DiagonalHom<S>, psi: &DiagonalHom<S>) -> Result<()> {
    if same_tree(&phi.source, &psi.source) && same_tree(&phi.target, &psi.target) {
        Ok(())
    } else {
        Err(Error::input("homomorphisms have different source or target trees"))
    }
}

/// `max_j max_e ‖g_e ∘ λ − g_e ∘ μ‖_∞` for one pair of eigenvalue maps.
fn map_distance<S: Scalar>(gens: &[PlFunction<S>], a: &PlTreeMap<S>, b: &PlTreeMap<S>) -> Result<S> {
    gens.iter().try_fold(S::zero(), |acc, g| Ok(S::max_of(&acc, &a.pull_back(g)?.sup_norm_diff(&b.pull_back(g)?)?)))
}

/// `d_U` for multiplicity one, where unitary conjugation is trivial.
pub fn d_u_commutative<S: Scalar>(phi: &DiagonalHom<S>, psi: &DiagonalHom<S>) -> Result<S> {
    check_homs(phi, psi)?;
    if phi.multiplicity() != 1 || psi.multiplicity() != 1 {
        return Err(Error::Unsupported("d_u_commutative needs multiplicity 1; use d_u_upper_diagonal".into()));
    }
    map_distance(&generators(&phi.source), &phi.maps[0], &psi.maps[0])
}

/// Upper bound on `d_U`: the best constant permutation matching of the
/// eigenvalue maps, found as a bottleneck assignment.
pub fn d_u_upper_diagonal<S: Scalar>(phi: &DiagonalHom<S>, psi: &DiagonalHom<S>) -> Result<S> {
    check_homs(phi, psi)?;
    let m = phi.multiplicity();
    if psi.multiplicity() != m {
        return Err(Error::input(format!("multiplicities differ: {m} vs {}", psi.multiplicity())));
    }
    let gens = generators(&phi.source);
    let mut cost = vec![Vec::with_capacity(m); m];
    for (j, a) in phi.maps.iter().enumerate() {
        for b in &psi.maps {
            cost[j].push(map_distance(&gens, a, b)?);
        }
    }
    let mut levels: Vec<S> = cost.iter().flatten().cloned().collect();
    levels.sort();
    levels.dedup();
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&cost, &levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(levels[lo].clone())
}

/// Kuhn's augmenting-path test for a perfect matching using only entries
/// `≤ bound`.
fn perfect_matching<S: Scalar>(cost: &[Vec<S>], bound: &S) -> bool {
    fn augment<S: Scalar>(j: usize, cost: &[Vec<S>], bound: &S, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for k in 0..cost.len() {
            if cost[j][k] <= *bound && !seen[k] {
                seen[k] = true;
                if owner[k].is_none_or(|o| augment(o, cost, bound, seen, owner)) {
                    owner[k] = Some(j);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; cost.len()];
    (0..cost.len()).all(|j| augment(j, cost, bound, &mut vec![false; cost.len()], &mut owner))
}

/// Pointwise value of `Σ_{e root edge} #{n : φ^e_n > 0}` maximised over
/// `Y`: the multiplicity a lift of `α` needs.
pub fn required_multiplicity<S: Scalar>(alpha: &GeneratorTable<S>) -> Result<usize> {
    let total = total_class(alpha);
    match total.sup() {
        Rank::Finite(n) => Ok((n as usize).max(1)),
        Rank::Infinite => Err(Error::Compatibility("total class is infinite".into())),
    }
}
