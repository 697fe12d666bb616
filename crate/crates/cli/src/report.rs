//! Report assembly, config hashing and atomic output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use tangent_hp::carleson::{CarlesonReport, Witness};
use tangent_hp::control::{ControlVerdict, ControlWitness, Property, TruncationPoint};
use tangent_hp::interpolation::{AngleReport, EvaluationReport, MEstimate};
use tangent_hp::Cx64;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON number, or a string for values JSON cannot carry.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn complex(z: Cx64) -> Value {
    json!([num(z.re), num(z.im)])
}

/// SHA-256 of the canonical serialisation: sorted keys, no whitespace.
pub fn config_hash(config: &Value) -> String {
    let canonical = serde_json::to_string(config).expect("JSON values always serialise");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Full report: provenance header plus the command results.
pub fn envelope(command: &str, kind: &str, input: Value, config: Value, results: Value) -> Value {
    let hashed = json!({ "tool_version": TOOL_VERSION, "command": command, "config": config, "input": input });
    let hash = config_hash(&hashed);
    json!({
        "tool": "tangent-hp",
        "tool_version": TOOL_VERSION,
        "command": command,
        "kind": kind,
        "input": hashed["input"],
        "config": hashed["config"],
        "config_hash": hash,
        "results": results,
    })
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("report");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

pub fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

/// CSV cell: shortest round-trip form, `inf`/`-inf`/`nan` otherwise.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn carleson(r: &CarlesonReport<f64>) -> Value {
    let witness = match &r.witness {
        Witness::Rectangle { center, side, half_width, atoms, matrix_sum_norm } => json!({
            "type": "rectangle",
            "center": num(*center),
            "side": num(*side),
            "half_width": num(*half_width),
            "atoms": atoms,
            "matrix_sum_norm": opt_num(*matrix_sum_norm),
        }),
        Witness::Kernel { lambda } => json!({ "type": "kernel", "lambda": complex(*lambda) }),
        Witness::Balayage { exponent } => json!({ "type": "balayage", "exponent": num(*exponent) }),
        Witness::Mass => json!({ "type": "mass" }),
        Witness::Empty => json!({ "type": "empty" }),
    };
    json!({
        "route": r.method.name(),
        "alpha": num(r.alpha),
        "constant": num(r.constant),
        "log_constant": num(r.log_constant),
        "witness": witness,
        "grid_spec": r.grid_spec,
        "rectangle_diagnostic": opt_num(r.rectangle_diagnostic),
    })
}

pub fn angles(a: &AngleReport<f64>) -> Value {
    let entries: Vec<Value> = a
        .entries
        .iter()
        .map(|e| {
            json!({
                "index": e.index,
                "angle": num(e.angle),
                "sin": num(e.sin),
                "log_sin": num(e.log_sin),
                "gram_condition": num(e.gram_condition),
                "span_size": e.span_size,
                "empty_span": e.empty_span,
                "method": format!("{:?}", e.method),
            })
        })
        .collect();
    json!({ "entries": entries, "gram_condition": num(a.gram_condition) })
}

pub fn m_estimate(m: &MEstimate<f64>, truncation: usize) -> Value {
    json!({
        "route": m.route.name(),
        "truncation": truncation,
        "value_lower": num(m.value_lower),
        "value_upper": num(m.value_upper),
        "log_value": num(m.log_value),
        "criterion": num(m.criterion),
        "log_criterion": num(m.log_criterion),
        "carleson": m.carleson_report.as_ref().map_or(Value::Null, carleson),
        "log_atom_weights": m.log_atom_weights.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "angles": m.angles.as_ref().map_or(Value::Null, angles),
        "simple_upper_bound": opt_num(m.simple_upper_bound),
        "log_simple_upper_bound": opt_num(m.log_simple_upper_bound),
        "witness_index": m.witness_index,
        "weight_constant": opt_num(m.weight_constant),
        "tail_certificate": num(m.tail_certificate),
    })
}

fn property(p: &Property<f64>) -> Value {
    match p {
        Property::Admissible => json!({ "name": "admissible" }),
        Property::Exact => json!({ "name": "exact" }),
        Property::Null { tau } => json!({ "name": "null", "tau": num(*tau) }),
        Property::Approximate => json!({ "name": "approx" }),
    }
}

fn control_witness(w: &ControlWitness<f64>) -> Value {
    match w {
        ControlWitness::Rectangle { center, height, atoms, exponent } => json!({
            "type": "rectangle",
            "center": num(*center),
            "height": num(*height),
            "atoms": atoms,
            "exponent": num(*exponent),
        }),
        ControlWitness::AxisNorm { q } => json!({ "type": "axis_norm", "q": num(*q) }),
        ControlWitness::Carleson(r) => json!({ "type": "carleson", "report": carleson(r) }),
        ControlWitness::Rank { ranks } => json!({ "type": "rank", "ranks": ranks }),
    }
}

fn evidence(points: &[TruncationPoint<f64>], route: &str) -> Value {
    Value::Array(
        points
            .iter()
            .map(|p| {
                json!({
                    "route": route,
                    "truncation": p.truncation,
                    "log_value": num(p.log_value),
                    "log_increment": num(p.log_increment),
                })
            })
            .collect(),
    )
}

pub fn control_verdict(v: &ControlVerdict<f64>) -> Value {
    let summands: Vec<Value> = v
        .summands
        .iter()
        .map(|m| {
            json!({
                "index": m.index,
                "eigenvalue": complex(m.eigenvalue),
                "b_norm": num(m.b_norm),
                "log_sin_angle": num(m.log_sin_angle),
                "log_weight": num(m.log_weight),
            })
        })
        .collect();
    json!({
        "property": property(&v.property),
        "verdict": v.verdict.name(),
        "route": v.theorem_route,
        "truncation": v.truncation,
        "caveat": v.caveat.name(),
        "criterion_value": num(v.criterion_value),
        "log_criterion_value": num(v.log_criterion_value),
        "witness": control_witness(&v.witness),
        "evidence": evidence(&v.evidence, v.theorem_route),
        "summands": summands,
        "assumptions": v.assumptions,
    })
}

pub fn evaluation(e: &EvaluationReport<f64>, truncation: usize) -> Value {
    let mut m = Map::new();
    m.insert("route".into(), json!("evaluation-operator"));
    m.insert("truncation".into(), json!(truncation));
    m.insert("boundedness".into(), carleson(&e.boundedness));
    m.insert("scaled_lower".into(), num(e.scaled_lower));
    m.insert("scaled_upper".into(), num(e.scaled_upper));
    m.insert(
        "scaled_bounds".into(),
        Value::Array(e.scaled_bounds.iter().map(|&(a, b)| json!([num(a), num(b)])).collect()),
    );
    m.insert("dual_geometry".into(), e.dual_geometry.as_ref().map_or(Value::Null, carleson));
    m.insert("primal_geometry".into(), carleson(&e.primal_geometry));
    m.insert("localized_gram".into(), Value::Array(e.localized_gram.iter().map(|&x| num(x)).collect()));
    m.insert("max_localized_gram".into(), num(e.max_localized_gram));
    m.insert("union_carleson".into(), carleson(&e.union_carleson));
    m.insert("min_separation".into(), num(e.min_separation));
    m.insert("radius".into(), num(e.radius));
    Value::Object(m)
}
