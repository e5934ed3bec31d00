//! JSON encodings. Rationals travel as `"p/q"` strings, ranks as integers
//! or `"inf"`, edge ids as the decimal index into the tree's edge list.
//! Every document except a bare tree carries a `"kind"` and its trees.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::lifting::Certificate;
use crate::lsc::{EdgeSteps, LscFunction, Rank};
use crate::metrics::{DiagonalHom, GeneratorTable, LevelFamily};
use crate::pl::PlFunction;
use crate::scalar::{format_exact, Scalar};
use crate::tree::{EdgeId, RootedTree, TreePoint, VertexId};
use crate::tree_map::PlTreeMap;

/// A parsed input file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document<S: Scalar> {
    Tree(Arc<RootedTree>),
    PlFunction(PlFunction<S>),
    TreeMap(PlTreeMap<S>),
    Lsc(LscFunction<S>),
    Table(GeneratorTable<S>),
    Hom(DiagonalHom<S>),
}

impl<S: Scalar> Document<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Tree(_) => "tree",
            Document::PlFunction(_) => "pl_function",
            Document::TreeMap(_) => "tree_map",
            Document::Lsc(_) => "lsc_function",
            Document::Table(_) => "table",
            Document::Hom(_) => "hom",
        }
    }

    /// Names of the structural invariants validated for this kind, in the
    /// order they are checked.
    pub fn invariants(kind: &str) -> &'static [&'static str] {
        match kind {
            "tree" => &["distinct_vertices", "known_vertices", "root_no_incoming", "unique_parent", "acyclic", "connected", "nonempty"],
            "pl_function" => &["breakpoints", "nonnegative", "continuity"],
            "tree_map" => &["waypoints", "continuity"],
            "lsc_function" => &["cuts", "lsc", "root_excluded", "shared_vertices"],
            "table" => &["breakpoints", "nonnegative", "continuity", "unit_interval", "root_zero", "vertex_compatibility"],
            "hom" => &["waypoints", "continuity", "multiplicity", "root_compatibility"],
            _ => &[],
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let Some(kind) = v.get("kind") else {
            return Ok(Document::Tree(Arc::new(tree_from_json(v, "$")?)));
        };
        let kind = kind.as_str().ok_or_else(|| Error::parse("$.kind", "expected a string"))?;
        Ok(match kind {
            "tree" => Document::Tree(Arc::new(tree_from_json(v, "$")?)),
            "pl_function" => {
                let tree = Arc::new(tree_from_json(field(v, "$", "tree")?, "$.tree")?);
                Document::PlFunction(pl_from_json(field(v, "$", "function")?, &tree, "$.function")?)
            }
            "tree_map" => {
                let source = Arc::new(tree_from_json(field(v, "$", "source")?, "$.source")?);
                let target = Arc::new(tree_from_json(field(v, "$", "target")?, "$.target")?);
                Document::TreeMap(map_from_json(field(v, "$", "map")?, &source, &target, "$.map")?)
            }
            "lsc_function" => {
                let tree = Arc::new(tree_from_json(field(v, "$", "tree")?, "$.tree")?);
                Document::Lsc(lsc_from_json(field(v, "$", "function")?, &tree, "$.function")?)
            }
            "table" => Document::Table(table_from_json(v)?),
            "hom" => Document::Hom(hom_from_json(v)?),
            other => return Err(Error::parse("$.kind", format!("unknown document kind `{other}`"))),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            Document::Tree(t) => {
                let mut v = tree_to_json(t);
                v["kind"] = json!("tree");
                v
            }
            Document::PlFunction(f) => json!({"kind": "pl_function", "tree": tree_to_json(f.tree()), "function": pl_to_json(f)}),
            Document::TreeMap(m) => json!({
                "kind": "tree_map",
                "source": tree_to_json(m.source()),
                "target": tree_to_json(m.target()),
                "map": map_to_json(m),
            }),
            Document::Lsc(f) => json!({"kind": "lsc_function", "tree": tree_to_json(f.tree()), "function": lsc_to_json(f)}),
            Document::Table(t) => table_to_json(t),
            Document::Hom(h) => hom_to_json(h),
        }
    }
}

/// Parses a document from text, reporting JSON syntax errors by line and
/// column.
pub fn parse_document<S: Scalar>(text: &str) -> Result<Document<S>> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {}, column {}", e.line(), e.column()), e.to_string()))?;
    Document::from_json(&v)
}

fn field<'a>(v: &'a Value, loc: &str, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| Error::parse(loc, format!("missing field `{name}`")))
}

fn array<'a>(v: &'a Value, loc: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::parse(loc, "expected an array"))
}

fn object<'a>(v: &'a Value, loc: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(loc, "expected an object"))
}

fn label(v: &Value, loc: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::parse(loc, "vertex ids are strings or integers")),
    }
}

pub fn rational_to_json<S: Scalar>(x: &S) -> Value {
    Value::String(format_exact(x))
}

pub fn rational_from_json<S: Scalar>(v: &Value, loc: &str) -> Result<S> {
    let parsed = match v {
        Value::String(s) => S::parse_exact(s),
        Value::Number(n) if n.is_i64() => S::parse_exact(&n.to_string()),
        _ => None,
    };
    parsed.ok_or_else(|| Error::parse(loc, format!("expected a rational \"p/q\", got {v}")))
}

fn rank_to_json(r: Rank) -> Value {
    match r.finite() {
        Some(n) => json!(n),
        None => json!("inf"),
    }
}

fn rank_from_json(v: &Value, loc: &str) -> Result<Rank> {
    match v {
        Value::Number(n) => n.as_u64().map(Rank::new).ok_or_else(|| Error::parse(loc, "ranks are nonnegative integers")),
        Value::String(s) => s.parse().map_err(|e: String| Error::parse(loc, e)),
        _ => Err(Error::parse(loc, "expected a rank (integer or \"inf\")")),
    }
}

fn edge_from_json(v: &Value, tree: &RootedTree, loc: &str) -> Result<EdgeId> {
    let k = match v {
        Value::String(s) => s.parse::<usize>().ok(),
        Value::Number(n) => n.as_u64().map(|k| k as usize),
        _ => None,
    }
    .ok_or_else(|| Error::parse(loc, format!("expected an edge index, got {v}")))?;
    let e = EdgeId(k);
    tree.check_edge(e).map_err(|_| Error::parse(loc, format!("edge {k} does not exist")))?;
    Ok(e)
}

/// Per-edge object keyed by edge index; every edge must be present.
fn per_edge<'a>(v: &'a Value, tree: &RootedTree, loc: &str) -> Result<Vec<(&'a Value, String)>> {
    let obj = object(v, loc)?;
    let mut out: Vec<Option<(&Value, String)>> = vec![None; tree.edge_count()];
    for (key, val) in obj {
        let at = format!("{loc}.{key}");
        let e = edge_from_json(&Value::String(key.clone()), tree, &at)?;
        out[e.0] = Some((val, at));
    }
    out.into_iter()
        .enumerate()
        .map(|(k, x)| x.ok_or_else(|| Error::parse(loc, format!("missing edge {k}"))))
        .collect()
}

pub fn tree_to_json(t: &RootedTree) -> Value {
    let labels = t.labels();
    let edges: Vec<Value> = t.edge_endpoints().iter().map(|(a, b)| json!([labels[a.0], labels[b.0]])).collect();
    json!({"vertices": labels, "edges": edges, "root": labels[t.root().0]})
}

pub fn tree_from_json(v: &Value, loc: &str) -> Result<RootedTree> {
    let vertices = array(field(v, loc, "vertices")?, &format!("{loc}.vertices"))?
        .iter()
        .enumerate()
        .map(|(i, x)| label(x, &format!("{loc}.vertices[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for (i, e) in array(field(v, loc, "edges")?, &format!("{loc}.edges"))?.iter().enumerate() {
        let at = format!("{loc}.edges[{i}]");
        match array(e, &at)?.as_slice() {
            [a, b] => edges.push((label(a, &at)?, label(b, &at)?)),
            _ => return Err(Error::parse(at, "an edge is a pair [initial, terminal]")),
        }
    }
    let root = label(field(v, loc, "root")?, &format!("{loc}.root"))?;
    RootedTree::new(&vertices, &edges, &root)
}

fn point_to_json<S: Scalar>(p: &TreePoint<S>) -> Value {
    json!({"edge": p.edge().0, "pos": rational_to_json(p.pos())})
}

fn point_from_json<S: Scalar>(v: &Value, tree: &RootedTree, loc: &str) -> Result<TreePoint<S>> {
    let e = edge_from_json(field(v, loc, "edge")?, tree, &format!("{loc}.edge"))?;
    let pos = rational_from_json(field(v, loc, "pos")?, &format!("{loc}.pos"))?;
    tree.point(e, pos)
}

pub fn pl_to_json<S: Scalar>(f: &PlFunction<S>) -> Value {
    let mut m = Map::new();
    for e in f.tree().edge_ids() {
        let knots: Vec<Value> = f.knots(e).iter().map(|(t, y)| json!([rational_to_json(t), rational_to_json(y)])).collect();
        m.insert(e.0.to_string(), Value::Array(knots));
    }
    Value::Object(m)
}

pub fn pl_from_json<S: Scalar>(v: &Value, tree: &Arc<RootedTree>, loc: &str) -> Result<PlFunction<S>> {
    let mut knots = Vec::with_capacity(tree.edge_count());
    for (list, at) in per_edge(v, tree, loc)? {
        let mut ks = Vec::new();
        for (i, pair) in array(list, &at)?.iter().enumerate() {
            let here = format!("{at}[{i}]");
            match array(pair, &here)?.as_slice() {
                [t, y] => ks.push((rational_from_json(t, &here)?, rational_from_json(y, &here)?)),
                _ => return Err(Error::parse(here, "a knot is a pair [t, value]")),
            }
        }
        knots.push(ks);
    }
    PlFunction::new(tree.clone(), knots)
}

pub fn map_to_json<S: Scalar>(m: &PlTreeMap<S>) -> Value {
    let mut out = Map::new();
    for e in m.source().edge_ids() {
        let w: Vec<Value> = m.waypoints(e).iter().map(|(s, p)| json!([rational_to_json(s), point_to_json(p)])).collect();
        out.insert(e.0.to_string(), Value::Array(w));
    }
    Value::Object(out)
}

pub fn map_from_json<S: Scalar>(
    v: &Value,
    source: &Arc<RootedTree>,
    target: &Arc<RootedTree>,
    loc: &str,
) -> Result<PlTreeMap<S>> {
    let mut all = Vec::with_capacity(source.edge_count());
    for (list, at) in per_edge(v, source, loc)? {
        let mut ws = Vec::new();
        for (i, pair) in array(list, &at)?.iter().enumerate() {
            let here = format!("{at}[{i}]");
            match array(pair, &here)?.as_slice() {
                [s, p] => ws.push((rational_from_json(s, &here)?, point_from_json(p, target, &format!("{here}[1]"))?)),
                _ => return Err(Error::parse(here, "a waypoint is a pair [s, point]")),
            }
        }
        all.push(ws);
    }
    PlTreeMap::new(source.clone(), target.clone(), all)
}

/// `point_values` follows the full cut list: entry `0` is the initial
/// vertex (`null` at the root), the last entry the terminal vertex.
pub fn lsc_to_json<S: Scalar>(f: &LscFunction<S>) -> Value {
    let t = f.tree();
    let vertex = |v: VertexId| f.vertex_value(v).filter(|_| v != t.root()).map(rank_to_json).unwrap_or(Value::Null);
    let mut out = Map::new();
    for e in t.edge_ids() {
        let st = f.edge_steps(e);
        let mut points = vec![vertex(t.init(e))];
        points.extend(st.points.iter().map(|r| rank_to_json(*r)));
        points.push(vertex(t.term(e)));
        out.insert(
            e.0.to_string(),
            json!({
                "cuts": st.cuts.iter().map(rational_to_json).collect::<Vec<_>>(),
                "interval_values": st.intervals.iter().map(|r| rank_to_json(*r)).collect::<Vec<_>>(),
                "point_values": points,
            }),
        );
    }
    Value::Object(out)
}

pub fn lsc_from_json<S: Scalar>(v: &Value, tree: &Arc<RootedTree>, loc: &str) -> Result<LscFunction<S>> {
    let mut edges = Vec::with_capacity(tree.edge_count());
    let mut vertices: Vec<Option<Rank>> = vec![None; tree.vertex_count()];
    let mut assign = |vertex: VertexId, val: &Value, at: &str| -> Result<()> {
        if vertex == tree.root() {
            return if val.is_null() { Ok(()) } else { Err(Error::invariant("root_excluded", format!("{at}: the root carries a value"))) };
        }
        let r = rank_from_json(val, at)?;
        match vertices[vertex.0] {
            Some(old) if old != r => Err(Error::invariant(
                "shared_vertices",
                format!("{at}: vertex `{}` given values {old} and {r}", tree.labels()[vertex.0]),
            )),
            _ => {
                vertices[vertex.0] = Some(r);
                Ok(())
            }
        }
    };
    for (k, (ev, at)) in per_edge(v, tree, loc)?.into_iter().enumerate() {
        let e = EdgeId(k);
        let cuts = array(field(ev, &at, "cuts")?, &format!("{at}.cuts"))?
            .iter()
            .enumerate()
            .map(|(i, x)| rational_from_json(x, &format!("{at}.cuts[{i}]")))
            .collect::<Result<Vec<S>>>()?;
        let intervals = array(field(ev, &at, "interval_values")?, &format!("{at}.interval_values"))?
            .iter()
            .enumerate()
            .map(|(i, x)| rank_from_json(x, &format!("{at}.interval_values[{i}]")))
            .collect::<Result<Vec<Rank>>>()?;
        let raw = array(field(ev, &at, "point_values")?, &format!("{at}.point_values"))?;
        if raw.len() != cuts.len() || cuts.len() < 2 {
            return Err(Error::parse(format!("{at}.point_values"), "one point value per cut, at least two cuts"));
        }
        assign(tree.init(e), &raw[0], &format!("{at}.point_values[0]"))?;
        assign(tree.term(e), &raw[raw.len() - 1], &format!("{at}.point_values[{}]", raw.len() - 1))?;
        let points = raw[1..raw.len() - 1]
            .iter()
            .enumerate()
            .map(|(i, x)| rank_from_json(x, &format!("{at}.point_values[{}]", i + 1)))
            .collect::<Result<Vec<Rank>>>()?;
        edges.push(EdgeSteps { cuts, intervals, points });
    }
    LscFunction::new(tree.clone(), edges, vertices)
}

pub fn table_to_json<S: Scalar>(t: &GeneratorTable<S>) -> Value {
    let mut fams = Map::new();
    for e in t.source().edge_ids() {
        fams.insert(e.0.to_string(), Value::Array(t.family(e).stack().iter().map(pl_to_json).collect()));
    }
    json!({
        "kind": "table",
        "source": tree_to_json(t.source()),
        "target": tree_to_json(t.target()),
        "unital": t.is_unital(),
        "families": fams,
    })
}

fn unital_flag(v: &Value) -> Result<bool> {
    match v.get("unital") {
        None => Ok(false),
        Some(b) => b.as_bool().ok_or_else(|| Error::parse("$.unital", "expected a boolean")),
    }
}

pub fn table_from_json<S: Scalar>(v: &Value) -> Result<GeneratorTable<S>> {
    let source = Arc::new(tree_from_json(field(v, "$", "source")?, "$.source")?);
    let target = Arc::new(tree_from_json(field(v, "$", "target")?, "$.target")?);
    let unital = unital_flag(v)?;
    let mut families = Vec::with_capacity(source.edge_count());
    for (list, at) in per_edge(field(v, "$", "families")?, &source, "$.families")? {
        let entries = array(list, &at)?
            .iter()
            .enumerate()
            .map(|(i, f)| pl_from_json(f, &target, &format!("{at}[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let fam = LevelFamily::new(target.clone(), entries).map_err(|err| match err {
            Error::Domain(d) => Error::invariant("unit_interval", format!("{at}: {d}")),
            other => other,
        })?;
        families.push(fam);
    }
    GeneratorTable::new(source, target, families, unital)
}

/// The sampled `(t, F_e(t))` view of a table at every critical value.
pub fn table_levels_json<S: Scalar>(t: &GeneratorTable<S>) -> Value {
    let mut out = Map::new();
    for e in t.source().edge_ids() {
        let fam = t.family(e);
        let rows: Vec<Value> =
            fam.critical_values().iter().map(|s| json!([rational_to_json(s), lsc_to_json(&fam.sample(s))])).collect();
        out.insert(e.0.to_string(), Value::Array(rows));
    }
    Value::Object(out)
}

pub fn hom_to_json<S: Scalar>(h: &DiagonalHom<S>) -> Value {
    json!({
        "kind": "hom",
        "source": tree_to_json(h.source()),
        "target": tree_to_json(h.target()),
        "unital": h.is_unital(),
        "multiplicity": h.multiplicity(),
        "maps": h.maps().iter().map(map_to_json).collect::<Vec<_>>(),
    })
}

pub fn hom_from_json<S: Scalar>(v: &Value) -> Result<DiagonalHom<S>> {
    let source = Arc::new(tree_from_json(field(v, "$", "source")?, "$.source")?);
    let target = Arc::new(tree_from_json(field(v, "$", "target")?, "$.target")?);
    let unital = unital_flag(v)?;
    let maps = array(field(v, "$", "maps")?, "$.maps")?
        .iter()
        .enumerate()
        .map(|(i, m)| map_from_json(m, &target, &source, &format!("$.maps[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(m) = v.get("multiplicity") {
        if m.as_u64() != Some(maps.len() as u64) {
            return Err(Error::invariant("multiplicity", format!("multiplicity {m} but {} maps", maps.len())));
        }
    }
    if maps.is_empty() {
        return Err(Error::invariant("multiplicity", "at least one map is required"));
    }
    DiagonalHom::new(source, target, maps, unital)
}

pub fn certificate_to_json<S: Scalar>(c: &Certificate<S>) -> Value {
    json!({"d_w": rational_to_json(&c.d_w), "eps": rational_to_json(&c.eps), "N": c.big_n, "n": c.n})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generator, generators};
    use crate::metrics::cu_of_hom;
    use crate::Rational;

    fn v_tree() -> Arc<RootedTree> {
        Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
    }

    fn round_trip(d: Document<Rational>) {
        let text = serde_json::to_string(&d.to_json()).unwrap();
        assert_eq!(parse_document::<Rational>(&text).unwrap(), d);
    }

    #[test]
    fn documents_round_trip() {
        let t = v_tree();
        round_trip(Document::Tree(t.clone()));
        let g: PlFunction<Rational> = generator(&t, EdgeId(0)).unwrap();
        round_trip(Document::PlFunction(g.minus_t_plus(&Rational::ratio(1, 3))));
        let y = Arc::new(RootedTree::interval());
        let m = PlTreeMap::new(y.clone(), t.clone(), vec![vec![(Rational::ratio(0, 1), t.root_point()), (Rational::ratio(1, 1), t.point(EdgeId(2), Rational::ratio(1, 2)).unwrap())]]).unwrap();
        round_trip(Document::TreeMap(m.clone()));
        let hom = DiagonalHom::new(t.clone(), y.clone(), vec![m.clone(), m], false).unwrap();
        round_trip(Document::Hom(hom.clone()));
        let table = cu_of_hom(&hom);
        round_trip(Document::Table(table.clone()));
        let lsc = table.family(EdgeId(0)).sample(&Rational::ratio(1, 4));
        round_trip(Document::Lsc(lsc));
        let gens: Vec<PlFunction<Rational>> = generators(&t);
        round_trip(Document::Lsc(LscFunction::indicator(&gens[1].superlevel(&Rational::ratio(1, 2)))));
    }

    #[test]
    fn errors_name_locations_and_invariants() {
        let bad = r#"{"vertices":["v","a"],"edges":[["v","a"],["a","v"]],"root":"v"}"#;
        assert!(matches!(parse_document::<Rational>(bad), Err(Error::Invariant { invariant: "acyclic", .. })));
        let bad = r#"{"vertices":["v","a"],"edges":[["v"]],"root":"v"}"#;
        assert!(matches!(parse_document::<Rational>(bad), Err(Error::Parse { location, .. }) if location == "$.edges[0]"));
        let lsc = r#"{"kind":"lsc_function","tree":{"vertices":["0","1"],"edges":[["0","1"]],"root":"0"},
            "function":{"0":{"cuts":["0","1/2","1"],"interval_values":[0,0],"point_values":[null,1,0]}}}"#;
        assert!(matches!(parse_document::<Rational>(lsc), Err(Error::Invariant { invariant: "lsc", .. })));
        assert!(matches!(parse_document::<Rational>("{"), Err(Error::Parse { .. })));
    }
}
