//! JSON report documents. Coefficients are exact strings, rationals as
//! `p/q`.

use germforge_core::engine::{Method, StageLog};
use germforge_core::Jet;
use serde_json::{json, Value};

pub const SCHEMA: &str = "germforge.report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Success,
    Obstructed,
    SeedRequired,
    Valid,
    Invalid,
    Determined,
    NotDetermined,
    Encoded,
    Probed,
    InputError,
    InternalError,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Success => "success",
            Verdict::Obstructed => "obstructed",
            Verdict::SeedRequired => "seed-required",
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Determined => "determined-at-order",
            Verdict::NotDetermined => "not-determined",
            Verdict::Encoded => "encoded",
            Verdict::Probed => "probed",
            Verdict::InputError => "input-error",
            Verdict::InternalError => "internal-error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Success | Verdict::Valid | Verdict::Determined | Verdict::Encoded | Verdict::Probed => 0,
            Verdict::Obstructed | Verdict::NotDetermined => 10,
            Verdict::SeedRequired => 11,
            Verdict::Invalid | Verdict::InputError => 2,
            Verdict::InternalError => 3,
        }
    }

    /// The verdict of a batch: the first failure by severity.
    pub fn combine(vs: &[Verdict]) -> Verdict {
        let rank = |v: &Verdict| match v {
            Verdict::InternalError => 0,
            Verdict::InputError => 1,
            Verdict::Obstructed => 2,
            Verdict::SeedRequired => 3,
            _ => 4,
        };
        vs.iter().copied().min_by_key(rank).unwrap_or(Verdict::Success)
    }
}

/// A report: `schema`, `command` and `verdict` followed by the body.
pub fn document(command: &str, verdict: Verdict, body: Value) -> Value {
    let mut doc = json!({ "schema": SCHEMA, "command": command, "verdict": verdict.as_str() });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

pub fn jet(j: &Jet) -> Value {
    Value::String(j.to_text())
}

pub fn jets(js: &[Jet]) -> Value {
    Value::Array(js.iter().map(jet).collect())
}

/// Terms in printing order: monomial and exact coefficient.
pub fn terms(j: &Jet) -> Value {
    let mut t: Vec<_> = j.terms().collect();
    t.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
    Value::Array(
        t.into_iter()
            .map(|(m, c)| json!({ "monomial": m.display(j.vars()), "coefficient": c.to_string() }))
            .collect(),
    )
}

pub fn residual(r: &[(String, Jet)]) -> Value {
    Value::Array(r.iter().map(|(l, j)| json!({ "equation": l, "normal_form": j.to_text() })).collect())
}

pub fn log(l: &[StageLog]) -> Value {
    Value::Array(
        l.iter()
            .map(|s| {
                json!({
                    "order": s.order,
                    "rows": s.rows,
                    "columns": s.columns,
                    "rank": s.rank,
                    "iterations": s.iterations,
                })
            })
            .collect(),
    )
}

pub fn method(m: Method) -> &'static str {
    match m {
        Method::Newton => "newton",
        Method::Search => "search",
    }
}
