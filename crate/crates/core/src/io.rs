//! JSON and CSV forms of sequences, diagnostics, jets, tables and reports.
//!
//! Every real is written as a string: exact values as `p/q` (or integers),
//! extended-precision values as decimals carrying all mantissa digits, with
//! the numeric mode stated alongside.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rug::{Float, Rational};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::harness::{Fit, ReportRow, VerificationReport};
use crate::jet::Jet;
use crate::numeric::{format_float, format_rational, parse_rational, Number, Scalar};
use crate::sequence::{DcDiagnostics, Family, RegularizedSequence, SequenceError, SequenceKind, WeightSequence};
use crate::substitution::BTable;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("sequence file: {0}")]
    Schema(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    name: Option<String>,
    kind: String,
    #[serde(default)]
    values: Option<Vec<Value>>,
    #[serde(default)]
    log_values: Option<Vec<Value>>,
    #[serde(default)]
    family: Option<RawFamily>,
    #[serde(default)]
    precision: Option<String>,
}

#[derive(Deserialize)]
struct RawFamily {
    id: String,
    #[serde(default)]
    params: BTreeMap<String, Value>,
}

fn scalar_text(v: &Value) -> Result<String, IoError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(IoError::Schema(format!("expected a decimal string, got {other}"))),
    }
}

fn rationals(values: &[Value]) -> Result<Vec<Rational>, IoError> {
    values
        .iter()
        .map(|v| Ok(parse_rational(&scalar_text(v)?).map_err(SequenceError::from)?))
        .collect()
}

/// Parses the sequence file schema
/// `{"name", "kind": "explicit"|"family", "values": [...], "family": {"id", "params"}}`.
/// Explicit files may give `log_values` (exact `ln M_n`) instead of `values`.
pub fn parse_sequence(text: &str) -> Result<WeightSequence, IoError> {
    let raw: RawSequence = serde_json::from_str(text)?;
    let name = raw.name.unwrap_or_else(|| "sequence".into());
    let _ = raw.precision;
    match raw.kind.as_str() {
        "explicit" => match (raw.values, raw.log_values) {
            (Some(v), None) => Ok(WeightSequence::from_values(name, &rationals(&v)?)?),
            (None, Some(l)) => Ok(WeightSequence::from_logs(name, &rationals(&l)?)?),
            _ => Err(IoError::Schema("explicit kind needs exactly one of `values` or `log_values`".into())),
        },
        "family" => {
            let fam = raw.family.ok_or_else(|| IoError::Schema("family kind needs a `family` object".into()))?;
            let params = fam
                .params
                .iter()
                .map(|(k, v)| Ok((k.clone(), scalar_text(v)?)))
                .collect::<Result<BTreeMap<_, _>, IoError>>()?;
            Ok(WeightSequence::family(Family::from_params(&fam.id, &params)?).rename(name))
        }
        other => Err(IoError::Schema(format!("unknown kind `{other}`"))),
    }
}

pub fn number_text(v: &Number) -> String {
    v.to_string()
}

fn mode_of(values: &[Number], precision: u32) -> String {
    if values.iter().all(Number::is_exact) {
        "exact".into()
    } else {
        format!("float{precision}")
    }
}

fn strings(values: &[Number]) -> Vec<Value> {
    values.iter().map(|v| Value::String(number_text(v))).collect()
}

/// `M_0..M_upto` in the sequence schema.
pub fn sequence_json(m: &WeightSequence, upto: usize) -> Result<Value, IoError> {
    let values = m.prefix(upto + 1)?.values();
    let mut obj = Map::new();
    obj.insert("name".into(), json!(m.name()));
    obj.insert("kind".into(), json!(m.kind().to_string()));
    obj.insert("values".into(), Value::Array(strings(&values)));
    if let (SequenceKind::Family, Some(f)) = (m.kind(), m.as_family()) {
        let params: Map<String, Value> = f.params().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        obj.insert("family".into(), json!({"id": f.id(), "params": params}));
    }
    obj.insert("precision".into(), json!(mode_of(&values, m.precision())));
    Ok(Value::Object(obj))
}

pub fn regularized_json(reg: &RegularizedSequence) -> Value {
    let values = reg.values();
    json!({
        "name": format!("{}^C", reg.source().name()),
        "kind": "explicit",
        "values": strings(&values),
        "support": reg.support(),
        "source": reg.source().name(),
        "precision": mode_of(&values, reg.prefix().precision()),
    })
}

pub fn dc_json(m: &WeightSequence, upto: usize, d: &DcDiagnostics) -> Value {
    let class = crate::sequence::classify_quasianalytic(m);
    json!({
        "sequence": m.name(),
        "upto": upto,
        "partial_sums": strings(&d.partial_sums),
        "verdict": d.verdict.to_string(),
        "basis": d.basis.to_string(),
        "ratio_series": class.ratio_series,
        "justification": class.justification,
        "precision": mode_of(&d.partial_sums, m.precision()),
    })
}

pub fn jet_json<T: Scalar>(function: &str, jet: &Jet<T>) -> Value {
    let text = |v: &T| number_text(&v.to_number());
    json!({
        "function": function,
        "base_point": text(jet.base_point()),
        "order": jet.order(),
        "precision": jet.mode().to_string(),
        "coefficients": jet.coeffs().iter().map(text).collect::<Vec<_>>(),
        "derivatives": jet.derivatives().iter().map(text).collect::<Vec<_>>(),
    })
}

pub const BTABLE_CSV_HEADER: &str = "n,k,i,j,B";

/// Rows `n,k,i,j,B` in increasing `i`.
pub fn btable_csv_rows(table: &BTable, out: &mut String) {
    for (i, j, b) in table.entries() {
        let _ = writeln!(out, "{},{},{i},{j},{b}", table.n(), table.k());
    }
}

fn f(v: &Float) -> Value {
    Value::String(format_float(v))
}

fn row_json(r: &ReportRow) -> Value {
    let mut obj = Map::new();
    obj.insert("n".into(), json!(r.n));
    if let Some(ell) = r.ell {
        obj.insert("ell".into(), json!(ell));
    }
    obj.insert("x".into(), json!(format_rational(&r.x)));
    obj.insert("actual".into(), f(&r.actual));
    obj.insert("bound".into(), f(&r.bound));
    obj.insert("ratio".into(), f(&r.ratio));
    obj.insert("branch".into(), json!(r.branch));
    obj.insert("pass".into(), json!(r.pass));
    Value::Object(obj)
}

fn fit_json(fit: &Fit) -> Value {
    let mut obj = Map::new();
    obj.insert("A".into(), f(&fit.a));
    obj.insert(fit.growth_name.into(), f(&fit.growth));
    obj.insert("normalized".into(), Value::Array(fit.normalized.iter().map(f).collect()));
    Value::Object(obj)
}

pub fn report_json(r: &VerificationReport) -> Value {
    let mut obj = Map::new();
    obj.insert("suite".into(), json!(r.suite));
    obj.insert("pair".into(), json!(r.pair));
    obj.insert(
        "grid".into(),
        Value::Array(r.grid.points().iter().map(|p| json!(format_rational(p))).collect()),
    );
    obj.insert("orders".into(), json!(r.orders));
    obj.insert(
        "precision".into(),
        json!({"mode": format!("float{}", r.precision), "tolerance": format!("2^-{}", r.tolerance_exp)}),
    );
    obj.insert("verdict".into(), json!(r.verdict.to_string()));
    obj.insert("fit".into(), r.fit.as_ref().map_or(Value::Null, fit_json));
    obj.insert("worst".into(), r.worst_row().map_or(Value::Null, row_json));
    if let Some(d) = &r.deriv0 {
        obj.insert(
            "deriv0".into(),
            json!({"orders": d.orders, "exact": d.exact, "holds": d.holds, "mismatches": d.mismatches}),
        );
    }
    if let Some(p) = &r.premise {
        obj.insert(
            "premise".into(),
            json!({
                "function": p.function,
                "a": format_rational(&p.a),
                "orders": p.orders,
                "scale": format_float(&p.scale),
                "grid": p.grid.points().iter().map(format_rational).collect::<Vec<_>>(),
            }),
        );
    }
    if !r.flatness.is_empty() {
        let rows: Vec<Value> = r
            .flatness
            .iter()
            .map(|fl| {
                json!({
                    "n": fl.n,
                    "smallest_x": format_rational(&fl.smallest_x),
                    "value_at_smallest": format_float(&fl.value_at_smallest),
                    "decreasing_tail": fl.decreasing_tail,
                    "argmax_ratio_x": format_rational(&fl.argmax_ratio_x),
                })
            })
            .collect();
        obj.insert("flatness".into(), Value::Array(rows));
    }
    obj.insert("notes".into(), json!(r.notes));
    obj.insert("rows".into(), Value::Array(r.rows.iter().map(row_json).collect()));
    Value::Object(obj)
}

pub const REPORT_CSV_HEADER: &str = "suite,pair,n,ell,x,actual,bound,ratio,branch,pass";

pub fn report_csv(r: &VerificationReport, out: &mut String) {
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.suite,
            csv_field(&r.pair),
            row.n,
            row.ell.map(|e| e.to_string()).unwrap_or_default(),
            format_rational(&row.x),
            format_float(&row.actual),
            format_float(&row.bound),
            format_float(&row.ratio),
            row.branch,
            row.pass
        );
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub max_order: usize,
    pub tolerance_exp: u32,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: crate::numeric::DEFAULT_PRECISION,
            max_order: crate::jet::DEFAULT_MAX_ORDER,
            tolerance_exp: crate::numeric::DEFAULT_TOLERANCE_EXP,
            format: OutputFormat::Json,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("precision must be at least 64 bits, got {0}")]
    Precision(u32),
    #[error("tolerance exponent must be at least 10, got {0}")]
    Tolerance(u32),
    #[error("tolerance 2^-{tolerance} is finer than the working precision of {precision} bits")]
    ToleranceBeyondPrecision { tolerance: u32, precision: u32 },
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.precision_bits < 64 {
            return Err(ConfigError::Precision(self.precision_bits));
        }
        if self.tolerance_exp < 10 {
            return Err(ConfigError::Tolerance(self.tolerance_exp));
        }
        if self.tolerance_exp + 8 > self.precision_bits {
            return Err(ConfigError::ToleranceBeyondPrecision {
                tolerance: self.tolerance_exp,
                precision: self.precision_bits,
            });
        }
        Ok(())
    }

    pub fn harness(&self) -> crate::harness::HarnessConfig {
        crate::harness::HarnessConfig {
            precision: self.precision_bits,
            tolerance_exp: self.tolerance_exp,
            budget: crate::jet::OrderBudget::new(self.max_order),
            ..Default::default()
        }
    }
}
