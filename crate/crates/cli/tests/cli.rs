use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use serde_json::{json, Value};
use tempfile::TempDir;

use cutree::wire::{hom_to_json, table_to_json, tree_to_json};
use cutree::{cu_of_hom, DiagonalHom, EdgeId, PlTreeMap, Rational, RootedTree, Scalar};

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn interval() -> Arc<RootedTree> {
    Arc::new(RootedTree::interval())
}

fn v_tree() -> Arc<RootedTree> {
    Arc::new(RootedTree::new(&["v", "a", "b", "c"], &[("v", "a"), ("a", "b"), ("a", "c")], "v").unwrap())
}

fn path_map(pts: &[(Rational, Rational)]) -> PlTreeMap {
    let i = interval();
    let w = pts.iter().map(|(s, t)| (s.clone(), i.point(EdgeId(0), t.clone()).unwrap())).collect();
    PlTreeMap::new(i.clone(), i, vec![w]).unwrap()
}

fn identity() -> DiagonalHom {
    let i = interval();
    DiagonalHom::new(i.clone(), i.clone(), vec![PlTreeMap::identity(i)], true).unwrap()
}

fn shift() -> DiagonalHom {
    let i = interval();
    let m = path_map(&[(q(0, 1), q(3, 10)), (q(7, 10), q(1, 1)), (q(1, 1), q(1, 1))]);
    DiagonalHom::new(i.clone(), i, vec![m], true).unwrap()
}

fn doubling() -> DiagonalHom {
    let i = interval();
    let m = path_map(&[(q(0, 1), q(0, 1)), (q(1, 2), q(1, 1)), (q(1, 1), q(1, 1))]);
    DiagonalHom::new(i.clone(), i, vec![m], false).unwrap()
}

struct Run {
    code: i32,
    report: Value,
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cutree"));
    cmd.args(args).env_remove("CU_TREES_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let Output { status, stdout, .. } = cmd.output().expect("binary runs");
    let report = serde_json::from_slice(&stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&stdout)));
    Run { code: status.code().expect("exit code"), report }
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn statuses(report: &Value) -> Vec<(String, String)> {
    report["results"]["document"]["invariants"]
        .as_array()
        .or_else(|| report["error"]["document"]["invariants"].as_array())
        .expect("invariant list")
        .iter()
        .map(|i| (i["name"].as_str().unwrap().to_string(), i["status"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn validate_reports_every_invariant() {
    let dir = TempDir::new().unwrap();
    let tree = write(&dir, "v.json", &tree_to_json(&v_tree()));
    let r = run(&["validate", s(&tree)], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["status"], "ok");
    let st = statuses(&r.report);
    assert!(st.iter().any(|(n, _)| n == "acyclic"));
    assert!(st.iter().all(|(_, v)| v == "pass"));
    assert_eq!(r.report["inputs"][s(&tree)].as_str().unwrap().len(), 64);
}

#[test]
fn validate_names_the_acyclicity_failure() {
    let dir = TempDir::new().unwrap();
    let tree = write(&dir, "cycle.json", &json!({"vertices": ["v", "a"], "edges": [["v", "a"], ["a", "v"]], "root": "v"}));
    let r = run(&["validate", s(&tree)], &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["error"]["invariant"], "acyclic");
    assert!(statuses(&r.report).contains(&("acyclic".into(), "fail".into())));
}

#[test]
fn validate_names_the_lsc_failure() {
    let dir = TempDir::new().unwrap();
    let doc = json!({
        "kind": "lsc_function",
        "tree": tree_to_json(&interval()),
        "function": {"0": {"cuts": ["0", "1/2", "1"], "interval_values": [0, 0], "point_values": [null, 1, 0]}},
    });
    let f = write(&dir, "lsc.json", &doc);
    let r = run(&["validate", s(&f)], &[]);
    assert_eq!(r.code, 2);
    let st = statuses(&r.report);
    assert!(st.contains(&("lsc".into(), "fail".into())));
    assert!(st.contains(&("cuts".into(), "pass".into())));
}

#[test]
fn validate_locates_syntax_errors() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{\n  \"vertices\": [\"v\",\n").unwrap();
    let r = run(&["validate", s(&p)], &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["error"]["kind"], "parse");
    assert!(r.report["error"]["error"]["location"].as_str().unwrap().starts_with("line 3"));
}

#[test]
fn distances_of_the_shift_pair() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "id.json", &hom_to_json(&identity()));
    let b = write(&dir, "shift.json", &hom_to_json(&shift()));
    let ta = write(&dir, "id_table.json", &table_to_json(&cu_of_hom(&identity())));
    let tb = write(&dir, "shift_table.json", &table_to_json(&cu_of_hom(&shift())));

    let r = run(&["dist", "dw", s(&a), s(&b)], &[]);
    assert_eq!((r.code, &r.report["results"]["d_w"]), (0, &json!("3/10")));
    let r = run(&["dist", "dw", s(&ta), s(&tb)], &[]);
    assert_eq!(r.report["results"]["d_w"], "3/10");
    let r = run(&["dist", "dw", s(&ta), s(&ta)], &[]);
    assert_eq!(r.report["results"]["d_w"], "0");
    let r = run(&["dist", "du", s(&a), s(&b)], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["d_u"], "3/10");
    assert_eq!(r.report["results"]["bound"], "exact");

    let r = run(&["--decimal", "dist", "dw", s(&a), s(&b)], &[]);
    assert_eq!(r.report["results"]["d_w"], json!({"exact": "3/10", "decimal": 0.3}));
}

#[test]
fn du_needs_upper_above_multiplicity_one() {
    let dir = TempDir::new().unwrap();
    let i = interval();
    let two = |h: &DiagonalHom| DiagonalHom::new(i.clone(), i.clone(), vec![h.maps()[0].clone(), PlTreeMap::identity(i.clone())], true).unwrap();
    let a = write(&dir, "a.json", &hom_to_json(&two(&identity())));
    let b = write(&dir, "b.json", &hom_to_json(&two(&shift())));
    let r = run(&["dist", "du", s(&a), s(&b)], &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["kind"], "unsupported");
    let r = run(&["dist", "du", s(&a), s(&b), "--upper"], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["bound"], "upper");
    assert_eq!(r.report["results"]["d_u"], "3/10");
}

#[test]
fn mismatched_trees_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", &table_to_json(&cu_of_hom(&identity())));
    let t = v_tree();
    let y = interval();
    let m = PlTreeMap::new(y.clone(), t.clone(), vec![vec![(q(0, 1), t.root_point()), (q(1, 1), t.point(EdgeId(1), q(1, 1)).unwrap())]]).unwrap();
    let b = write(&dir, "b.json", &table_to_json(&cu_of_hom(&DiagonalHom::new(t, y, vec![m], false).unwrap())));
    let r = run(&["dist", "dw", s(&a), s(&b)], &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["status"], "failed");
}

#[test]
fn forests_split_componentwise() {
    let dir = TempDir::new().unwrap();
    let forest = |hs: &[DiagonalHom]| json!({"kind": "forest", "components": hs.iter().map(|h| table_to_json(&cu_of_hom(h))).collect::<Vec<_>>()});
    let a = write(&dir, "a.json", &forest(&[identity(), doubling()]));
    let b = write(&dir, "b.json", &forest(&[shift(), doubling()]));
    let r = run(&["dist", "dw", s(&a), s(&b)], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["d_w"], "3/10");
    assert_eq!(r.report["results"]["components"], json!(["3/10", "0"]));
    let r = run(&["validate", s(&a)], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["document"]["components"].as_array().unwrap().len(), 2);
}

#[test]
fn lift_writes_a_certified_homomorphism() {
    let dir = TempDir::new().unwrap();
    let alpha = write(&dir, "alpha.json", &table_to_json(&cu_of_hom(&doubling())));
    let out = dir.path().join("hom.json");
    let r = run(&["lift", "--alpha", s(&alpha), "--eps", "1/4", "--out", s(&out)], &[]);
    assert_eq!(r.code, 0, "{}", r.report);
    let cert = &r.report["results"]["certificate"];
    assert_eq!((cert["eps"].as_str(), cert["N"].as_u64(), cert["n"].as_u64()), (Some("1/4"), Some(6), Some(4)));
    let d_w: Rational = cert["d_w"].as_str().unwrap().parse().unwrap();
    assert!(d_w < q(1, 4));

    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(&written["certificate"], cert);
    assert_eq!(written["kind"], "hom");
    let r = run(&["validate", s(&out)], &[]);
    assert_eq!(r.code, 0);
    let r = run(&["dist", "dw", s(&alpha), s(&out)], &[]);
    assert_eq!(r.report["results"]["d_w"], cert["d_w"]);
}

#[test]
fn lift_rejects_bad_tolerances_and_inputs() {
    let dir = TempDir::new().unwrap();
    let alpha = write(&dir, "alpha.json", &table_to_json(&cu_of_hom(&doubling())));
    assert_eq!(run(&["lift", "--alpha", s(&alpha), "--eps", "0"], &[]).code, 2);
    assert_eq!(run(&["lift", "--alpha", s(&alpha), "--eps", "one"], &[]).code, 2);
    let tree = write(&dir, "tree.json", &tree_to_json(&interval()));
    assert_eq!(run(&["lift", "--alpha", s(&tree), "--eps", "1/4"], &[]).code, 2);
    let unital = write(&dir, "shift.json", &table_to_json(&cu_of_hom(&shift())));
    let r = run(&["lift", "--alpha", s(&unital), "--eps", "1/4"], &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["error"]["kind"], "compatibility");
}

#[test]
fn check_runs_suites_and_respects_the_seed_variable() {
    let r = run(&["check", "compare", "--seed", "7", "--cases", "20"], &[]);
    assert_eq!(r.code, 0);
    assert_eq!((r.report["results"]["passed"].as_u64(), r.report["results"]["seed"].as_u64()), (Some(20), Some(7)));
    let r = run(&["check", "order", "--seed", "7", "--cases", "5"], &[("CU_TREES_SEED", "3")]);
    assert_eq!(r.report["results"]["seed"], 3);
    assert_eq!(run(&["check", "order", "--cases", "5"], &[("CU_TREES_SEED", "x")]).code, 2);
    let r = run(&["check", "nonsense"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"]["message"].as_str().unwrap().contains("unknown suite"));
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let strip = |mut r: Run| {
        r.report.as_object_mut().unwrap().remove("timing");
        serde_json::to_string(&r.report).unwrap()
    };
    let args = ["check", "cc", "--seed", "11", "--cases", "30"];
    assert_eq!(strip(run(&args, &[])), strip(run(&args, &[])));
    assert_eq!(strip(run(&["demo"], &[])), strip(run(&["demo"], &[])));
}

#[test]
fn demo_reproduces_the_worked_examples() {
    let r = run(&["demo"], &[]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["results"]["shift"]["d_w"], "3/10");
    assert_eq!(r.report["results"]["shift"]["d_u"], "3/10");
    let lift = &r.report["results"]["lift"];
    assert_eq!(lift["recomputed_d_w"], lift["certificate"]["d_w"]);
}
