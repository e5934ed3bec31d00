//! `cutree`: validate documents, compute distances, run lifts and property
//! suites. Every command prints one JSON report on stdout.
//!
//! Exit codes: 0 success, 2 validation failure, 3 property failure,
//! 4 infeasible or unrealizable lift.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use cutree::suites::{run_suite, SUITES};
use cutree::wire::{certificate_to_json, hom_to_json, rational_to_json, table_levels_json, table_to_json, Document};
use cutree::{
    approximate_lift, cu_of_hom, d_u_commutative, d_u_upper_diagonal, d_w_tree, DiagonalHom, EdgeId, Error, GeneratorTable,
    PlTreeMap, Rational, RootedTree, Scalar,
};

const SEED_VAR: &str = "CU_TREES_SEED";

#[derive(Parser)]
#[command(name = "cutree", version, about = "Exact Cuntz-semigroup computations on rooted trees")]
struct Cli {
    /// Add decimal renderings next to exact results (display only).
    #[arg(long, global = true)]
    decimal: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural invariants of a tree, function, map, table or
    /// homomorphism file.
    Validate { path: PathBuf },

    /// Exact distance between two tables or homomorphisms.
    Dist {
        kind: DistKind,
        a: PathBuf,
        b: PathBuf,
        /// For `du` with multiplicity above one, report the diagonal upper
        /// bound.
        #[arg(long)]
        upper: bool,
    },

    /// Lift a generator table to a diagonal homomorphism within `eps`.
    Lift {
        #[arg(long)]
        alpha: PathBuf,
        /// Tolerance as an exact rational, e.g. `1/16`.
        #[arg(long)]
        eps: String,
        /// Write the homomorphism with its certificate here instead of
        /// embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Run a property suite over a seeded random corpus.
    Check {
        suite: String,
        /// Overridden by the CU_TREES_SEED environment variable.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },

    /// Worked examples: the shift pair and a small lift.
    Demo,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Dw,
    Du,
}

/// A failed command: exit code plus the error block of the report.
struct Failure {
    code: u8,
    error: Value,
}

impl Failure {
    fn validation(err: &Error) -> Self {
        Failure { code: 2, error: error_json(err) }
    }

    fn lift(err: &Error) -> Self {
        let code = match err {
            Error::Domain(_) | Error::Compatibility(_) | Error::Input(_) | Error::Parse { .. } => 2,
            _ => 4,
        };
        Failure { code, error: error_json(err) }
    }

    fn message(code: u8, kind: &str, msg: impl Into<String>) -> Self {
        Failure { code, error: json!({"kind": kind, "message": msg.into()}) }
    }
}

fn error_json(err: &Error) -> Value {
    let mut v = json!({"message": err.to_string()});
    let kind = match err {
        Error::Input(_) => "input",
        Error::Domain(_) => "domain",
        Error::Invariant { invariant, .. } => {
            v["invariant"] = json!(invariant);
            "invariant"
        }
        Error::Order { index, .. } => {
            v["index"] = json!(index);
            "order"
        }
        Error::UnsupportedDecomposition | Error::UnsupportedEvaluation(_) | Error::Unsupported(_) => "unsupported",
        Error::InfeasibleDiscretization { edge, .. } => {
            v["edge"] = json!(edge.0);
            "infeasible_discretization"
        }
        Error::UnrealizableProfile { edge, .. } => {
            v["edge"] = json!(edge.map(|e| e.0));
            "unrealizable_profile"
        }
        Error::Compatibility(_) => "compatibility",
        Error::Parse { location, .. } => {
            v["location"] = json!(location);
            "parse"
        }
    };
    v["kind"] = json!(kind);
    v
}

/// Inputs read so far, with their digests in reading order.
#[derive(Default)]
struct Inputs {
    digests: Map<String, Value>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::message(2, "io", format!("cannot read {}: {e}", path.display())))?;
        self.digests.insert(path.display().to_string(), json!(hex::encode(Sha256::digest(&bytes))));
        String::from_utf8(bytes).map_err(|_| Failure::message(2, "io", format!("{} is not UTF-8", path.display())))
    }

    /// The components of a document file: one, or several for a forest.
    fn load(&mut self, path: &Path) -> Result<Vec<Document<Rational>>, Failure> {
        let text = self.read(path)?;
        let v = parse_json(&text).map_err(|e| Failure::validation(&e))?;
        components(&v).map_err(|e| Failure::validation(&e))
    }
}

fn parse_json(text: &str) -> cutree::Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        detail: e.to_string(),
    })
}

fn components(v: &Value) -> cutree::Result<Vec<Document<Rational>>> {
    if v.get("kind").and_then(Value::as_str) != Some("forest") {
        return Ok(vec![Document::from_json(v)?]);
    }
    let parts = v.get("components").and_then(Value::as_array).ok_or_else(|| Error::Parse {
        location: "$.components".into(),
        detail: "a forest lists its components in an array".into(),
    })?;
    if parts.is_empty() {
        return Err(Error::Parse { location: "$.components".into(), detail: "a forest needs at least one component".into() });
    }
    parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Document::from_json(p).map_err(|e| match e {
                Error::Parse { location, detail } => Error::Parse { location: format!("$.components[{i}]{}", &location[1..]), detail },
                other => other,
            })
        })
        .collect()
}

fn exact(x: &Rational, decimal: bool) -> Value {
    if decimal {
        json!({"exact": rational_to_json(x), "decimal": x.to_f64()})
    } else {
        rational_to_json(x)
    }
}

fn as_table(doc: &Document<Rational>) -> cutree::Result<GeneratorTable<Rational>> {
    match doc {
        Document::Table(t) => Ok(t.clone()),
        Document::Hom(h) => Ok(cu_of_hom(h)),
        other => Err(Error::Input(format!("expected a table or a homomorphism, got a {}", other.kind()))),
    }
}

fn as_hom(doc: &Document<Rational>) -> cutree::Result<&DiagonalHom<Rational>> {
    match doc {
        Document::Hom(h) => Ok(h),
        other => Err(Error::Input(format!("d_u compares homomorphisms, got a {}", other.kind()))),
    }
}

fn paired<'a>(
    a: &'a [Document<Rational>],
    b: &'a [Document<Rational>],
) -> Result<impl Iterator<Item = (&'a Document<Rational>, &'a Document<Rational>)>, Failure> {
    if a.len() != b.len() {
        return Err(Failure::message(2, "input", format!("component counts differ: {} vs {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b))
}

/// The larger of per-component values, reported with the components when
/// there are several.
fn combine(name: &str, values: Vec<Rational>, decimal: bool) -> Value {
    let max = values.iter().max().cloned().unwrap_or_else(|| q(0, 1));
    let mut out = Map::new();
    out.insert(name.into(), exact(&max, decimal));
    if values.len() > 1 {
        out.insert("components".into(), Value::Array(values.iter().map(|v| exact(v, decimal)).collect()));
    }
    Value::Object(out)
}

fn validate(inputs: &mut Inputs, path: &Path) -> Result<Value, Failure> {
    let text = inputs.read(path)?;
    let v = parse_json(&text).map_err(|e| Failure { code: 2, error: json!({"valid": false, "error": error_json(&e)}) })?;
    let parts: Vec<&Value> = match v.get("kind").and_then(Value::as_str) {
        Some("forest") => match v.get("components").and_then(Value::as_array) {
            Some(ps) if !ps.is_empty() => ps.iter().collect(),
            _ => {
                let e = Error::Parse { location: "$.components".into(), detail: "a forest lists its components in a nonempty array".into() };
                return Err(Failure { code: 2, error: json!({"valid": false, "error": error_json(&e)}) });
            }
        },
        _ => vec![&v],
    };
    let mut reports = Vec::new();
    let mut first_error = None;
    for p in parts {
        let kind = p.get("kind").and_then(Value::as_str).unwrap_or("tree");
        let result = Document::<Rational>::from_json(p);
        reports.push(invariant_report(kind, result.as_ref().err()));
        if let (Err(e), None) = (result, &first_error) {
            first_error = Some(e);
        }
    }
    let valid = first_error.is_none();
    let results = if reports.len() == 1 {
        reports.pop().expect("one report")
    } else {
        json!({"kind": "forest", "components": reports})
    };
    match first_error {
        None => Ok(json!({"valid": valid, "document": results})),
        Some(e) => Err(Failure { code: 2, error: json!({"valid": false, "document": results, "error": error_json(&e)}) }),
    }
}

/// Each invariant of `kind` in checking order: `pass` before the failing
/// one, `fail` for it, `unchecked` after.
fn invariant_report(kind: &str, err: Option<&Error>) -> Value {
    let names = Document::<Rational>::invariants(kind);
    let failed = match err {
        None => None,
        Some(Error::Invariant { invariant, .. }) => Some(*invariant),
        Some(Error::Parse { .. }) => Some("parse"),
        Some(_) => Some("structure"),
    };
    let mut list = Vec::new();
    let mut seen = failed.is_none();
    if let Some(f) = failed {
        if !names.contains(&f) {
            list.push(json!({"name": f, "status": "fail", "detail": err.map(|e| e.to_string())}));
            seen = true;
        }
    }
    for n in names {
        let status = if Some(*n) == failed {
            seen = true;
            list.push(json!({"name": n, "status": "fail", "detail": err.map(|e| e.to_string())}));
            continue;
        } else if seen && failed.is_some() {
            "unchecked"
        } else {
            "pass"
        };
        list.push(json!({"name": n, "status": status}));
    }
    json!({"kind": kind, "invariants": list})
}

fn dist(inputs: &mut Inputs, kind: DistKind, a: &Path, b: &Path, upper: bool, decimal: bool) -> Result<Value, Failure> {
    let da = inputs.load(a)?;
    let db = inputs.load(b)?;
    match kind {
        DistKind::Dw => {
            let values = paired(&da, &db)?
                .map(|(x, y)| d_w_tree(&as_table(x)?, &as_table(y)?))
                .collect::<cutree::Result<Vec<_>>>()
                .map_err(|e| Failure::validation(&e))?;
            Ok(combine("d_w", values, decimal))
        }
        DistKind::Du => {
            let mut values = Vec::new();
            let mut bound = false;
            for (x, y) in paired(&da, &db)? {
                let (hx, hy) = (as_hom(x).map_err(|e| Failure::validation(&e))?, as_hom(y).map_err(|e| Failure::validation(&e))?);
                let v = if hx.multiplicity() == 1 && hy.multiplicity() == 1 {
                    d_u_commutative(hx, hy)
                } else if upper {
                    bound = true;
                    d_u_upper_diagonal(hx, hy)
                } else {
                    return Err(Failure::message(
                        2,
                        "unsupported",
                        format!("exact d_u needs multiplicity 1 (got {} and {}); pass --upper for the diagonal upper bound", hx.multiplicity(), hy.multiplicity()),
                    ));
                };
                values.push(v.map_err(|e| Failure::validation(&e))?);
            }
            let mut out = combine("d_u", values, decimal);
            out["bound"] = json!(if bound { "upper" } else { "exact" });
            Ok(out)
        }
    }
}

fn lift(inputs: &mut Inputs, alpha: &Path, eps: &str, out: Option<&Path>, decimal: bool) -> Result<Value, Failure> {
    let eps = Rational::parse_exact(eps).ok_or_else(|| Failure::message(2, "parse", format!("eps `{eps}` is not a rational p/q")))?;
    let docs = inputs.load(alpha)?;
    let mut homs = Vec::new();
    let mut certs = Vec::new();
    for d in &docs {
        let table = as_table(d).map_err(|e| Failure::validation(&e))?;
        let l = approximate_lift(&table, &eps).map_err(|e| Failure::lift(&e))?;
        let mut h = hom_to_json(&l.hom);
        let mut c = certificate_to_json(&l.certificate);
        if decimal {
            c["d_w_decimal"] = json!(l.certificate.d_w.to_f64());
        }
        h["certificate"] = c.clone();
        homs.push(h);
        certs.push(c);
    }
    let (doc, certificate) = if homs.len() == 1 {
        (homs.pop().expect("one"), certs.pop().expect("one"))
    } else {
        (json!({"kind": "forest", "components": homs}), Value::Array(certs))
    };
    let mut results = json!({"certificate": certificate});
    match out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
            std::fs::write(path, text).map_err(|e| Failure::message(2, "io", format!("cannot write {}: {e}", path.display())))?;
            results["out"] = json!(path.display().to_string());
        }
        None => results["hom"] = doc,
    }
    Ok(results)
}

fn seed_from_env(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::message(2, "input", format!("{SEED_VAR}=`{s}` is not a nonnegative integer"))),
        Err(_) => Ok(flag),
    }
}

fn check(suite: &str, seed: u64, cases: usize, timing: &mut Map<String, Value>) -> Result<Value, Failure> {
    if !SUITES.contains(&suite) {
        return Err(Failure::message(2, "input", format!("unknown suite `{suite}`; known suites: {}", SUITES.join(", "))));
    }
    let seed = seed_from_env(seed)?;
    let report = run_suite(suite, seed, cases).map_err(|e| Failure::validation(&e))?;
    timing.insert("slowest_case_ms".into(), json!(report.slowest_case.as_millis() as u64));
    let results = report.to_json(false);
    if report.ok() {
        Ok(results)
    } else {
        Err(Failure { code: 3, error: json!({"kind": "property", "message": format!("{} of {} cases failed", report.failed, report.cases), "report": results}) })
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn demo(decimal: bool) -> Result<Value, Failure> {
    let fail = |e: Error| Failure::message(1, "internal", e.to_string());
    let i = Arc::new(RootedTree::interval());
    let p = |t: Rational| i.point(EdgeId(0), t).map_err(fail);
    let shift = PlTreeMap::new(i.clone(), i.clone(), vec![vec![(q(0, 1), p(q(3, 10))?), (q(7, 10), p(q(1, 1))?), (q(1, 1), p(q(1, 1))?)]])
        .map_err(fail)?;
    let id = DiagonalHom::new(i.clone(), i.clone(), vec![PlTreeMap::identity(i.clone())], true).map_err(fail)?;
    let sh = DiagonalHom::new(i.clone(), i.clone(), vec![shift], true).map_err(fail)?;
    let (ta, tb) = (cu_of_hom(&id), cu_of_hom(&sh));
    let dw = d_w_tree(&ta, &tb).map_err(fail)?;
    let du = d_u_commutative(&id, &sh).map_err(fail)?;

    let doubling = PlTreeMap::new(i.clone(), i.clone(), vec![vec![(q(0, 1), i.root_point()), (q(1, 2), p(q(1, 1))?), (q(1, 1), p(q(1, 1))?)]])
        .map_err(fail)?;
    let hom = DiagonalHom::new(i.clone(), i.clone(), vec![doubling], false).map_err(fail)?;
    let table = cu_of_hom(&hom);
    let eps = q(1, 4);
    let l = approximate_lift(&table, &eps).map_err(fail)?;
    let back = d_w_tree(&table, &cu_of_hom(&l.hom)).map_err(fail)?;
    Ok(json!({
        "shift": {
            "description": "identity versus s -> min(s + 3/10, 1) on [0, 1]",
            "d_w": exact(&dw, decimal),
            "d_u": exact(&du, decimal),
        },
        "lift": {
            "description": "table of s -> min(2s, 1) on [0, 1], lifted within eps",
            "table": table_to_json(&table),
            "levels": table_levels_json(&table),
            "certificate": certificate_to_json(&l.certificate),
            "recomputed_d_w": exact(&back, decimal),
            "multiplicity": l.hom.multiplicity(),
        },
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let command: Vec<String> = std::env::args().skip(1).collect();
    let mut inputs = Inputs::default();
    let mut timing = Map::new();
    let outcome = match &cli.command {
        Command::Validate { path } => validate(&mut inputs, path),
        Command::Dist { kind, a, b, upper } => dist(&mut inputs, *kind, a, b, *upper, cli.decimal),
        Command::Lift { alpha, eps, out } => lift(&mut inputs, alpha, eps, out.as_deref(), cli.decimal),
        Command::Check { suite, seed, cases } => check(suite, *seed, *cases, &mut timing),
        Command::Demo => demo(cli.decimal),
    };
    timing.insert("elapsed_ms".into(), json!(start.elapsed().as_millis() as u64));
    let mut report = json!({"command": command, "inputs": inputs.digests});
    let code = match outcome {
        Ok(results) => {
            report["status"] = json!("ok");
            report["results"] = results;
            0
        }
        Err(f) => {
            report["status"] = json!("failed");
            if let Some(m) = f.error.get("message").and_then(Value::as_str) {
                eprintln!("cutree: {m}");
            } else if let Some(m) = f.error.pointer("/error/message").and_then(Value::as_str) {
                eprintln!("cutree: {m}");
            }
            report["error"] = f.error;
            f.code
        }
    };
    report["timing"] = Value::Object(timing);
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&report).expect("serializable"));
    ExitCode::from(code)
}
