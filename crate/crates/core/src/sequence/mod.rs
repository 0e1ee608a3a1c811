//! Weight sequences `(M_n)`: explicit finite prefixes and closed-form
//! registry families, plus the regularizations and diagnostics built on them.
//!
//! Every sequence is materialized into a [`Prefix`] before any operation
//! touches it. A prefix always carries `ln M_n` at working precision and,
//! when the input allows it, an exact form that log-linear predicates fall
//! back to when the floating-point filter cannot decide a sign.

mod dc;
mod family;
mod hull;
mod transform;

use std::cmp::Ordering;
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Rational};
use thiserror::Error;

use crate::numeric::{Number, ParseNumberError, DEFAULT_PRECISION, SEQUENCE_GUARD_BITS};

pub use dc::{classify_quasianalytic, dc_partial_sums, Classification, DcDiagnostics, Verdict, VerdictBasis};
pub use family::Family;
pub use hull::{log_convex_minorant, RegularizedSequence};
pub use transform::{
    check_factorial_monotone, check_log_convex, hat_regularize, power_transform_sequence,
    power_transform_values,
};

/// Extra bits carried by stored logarithms beyond the requested precision.
const LOG_GUARD_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("value at index {index} is not positive")]
    NonPositive { index: usize },
    #[error("explicit sequence needs at least 3 values (M_0..M_2), got {0}")]
    TooShort(usize),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}`: {message}")]
    BadParameter { family: String, message: String },
    #[error("prefix too short: need {needed} values (indices 0..={}), have {available}", .needed - 1)]
    InsufficientPrefix { needed: usize, available: usize },
    #[error("power must be an integer > 1, got {0}")]
    BadPower(u32),
    #[error(transparent)]
    Number(#[from] ParseNumberError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Explicit,
    Family,
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::Explicit => "explicit",
            SequenceKind::Family => "family",
        })
    }
}

#[derive(Debug, Clone)]
enum ExactForm {
    /// `M_0` and the successive ratios `M_{n+1} / M_n`.
    Ratios { first: Rational, ratios: Vec<Rational> },
    /// Exact logarithms `ln M_n`.
    Logs(Vec<Rational>),
    /// Values known only to working precision.
    Inexact(Vec<Float>),
}

/// A materialized finite prefix `M_0..M_N`.
#[derive(Debug, Clone)]
pub struct Prefix {
    logs: Vec<Float>,
    exact: ExactForm,
    precision: u32,
}

impl Prefix {
    pub fn from_values(values: &[Rational], precision: u32) -> Result<Self, SequenceError> {
        if let Some(index) = values.iter().position(|v| v.cmp0() != Ordering::Greater) {
            return Err(SequenceError::NonPositive { index });
        }
        let ratios = values
            .windows(2)
            .map(|w| Rational::from(&w[1] / &w[0]))
            .collect();
        Ok(Self::from_ratios(values[0].clone(), ratios, precision))
    }

    /// Builds a prefix from `M_0 > 0` and positive ratios `M_{n+1}/M_n`.
    pub(crate) fn from_ratios(first: Rational, ratios: Vec<Rational>, precision: u32) -> Self {
        let wp = precision + LOG_GUARD_BITS;
        let mut logs = Vec::with_capacity(ratios.len() + 1);
        let mut acc = Float::with_val(wp, first.clone()).ln();
        logs.push(acc.clone());
        for q in &ratios {
            acc += Float::with_val(wp, q).ln();
            logs.push(acc.clone());
        }
        Prefix {
            logs,
            exact: ExactForm::Ratios { first, ratios },
            precision,
        }
    }

    pub fn from_logs(logs: &[Rational], precision: u32) -> Self {
        let wp = precision + LOG_GUARD_BITS;
        Prefix {
            logs: logs.iter().map(|l| Float::with_val(wp, l)).collect(),
            exact: ExactForm::Logs(logs.to_vec()),
            precision,
        }
    }

    pub fn from_floats(values: &[Float], precision: u32) -> Result<Self, SequenceError> {
        if let Some(index) = values.iter().position(|v| v.cmp0() != Some(Ordering::Greater)) {
            return Err(SequenceError::NonPositive { index });
        }
        let wp = precision + LOG_GUARD_BITS;
        Ok(Prefix {
            logs: values.iter().map(|v| Float::with_val(wp, v.ln_ref())).collect(),
            exact: ExactForm::Inexact(values.iter().map(|v| Float::with_val(precision, v)).collect()),
            precision,
        })
    }

    /// Inexact prefix from working-precision logarithms.
    pub(crate) fn from_float_logs(logs: Vec<Float>, precision: u32) -> Self {
        let values = logs.iter().map(|l| Float::with_val(precision, l.exp_ref())).collect();
        Prefix {
            logs,
            exact: ExactForm::Inexact(values),
            precision,
        }
    }

    pub fn len(&self) -> usize {
        self.logs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// True when comparisons can fall back to exact arithmetic.
    pub fn is_exact(&self) -> bool {
        !matches!(self.exact, ExactForm::Inexact(_))
    }

    pub fn log(&self, n: usize) -> &Float {
        &self.logs[n]
    }

    pub fn logs(&self) -> &[Float] {
        &self.logs
    }

    pub fn exact_log(&self, n: usize) -> Option<&Rational> {
        match &self.exact {
            ExactForm::Logs(logs) => Some(&logs[n]),
            _ => None,
        }
    }

    /// `M_0` when the prefix stores exact ratios.
    pub fn exact_first(&self) -> Option<&Rational> {
        match &self.exact {
            ExactForm::Ratios { first, .. } => Some(first),
            _ => None,
        }
    }

    /// `M_{n+1} / M_n` when the prefix stores exact ratios.
    pub fn exact_step(&self, n: usize) -> Option<&Rational> {
        match &self.exact {
            ExactForm::Ratios { ratios, .. } => Some(&ratios[n]),
            _ => None,
        }
    }

    pub fn value(&self, n: usize) -> Number {
        match &self.exact {
            ExactForm::Ratios { first, ratios } => {
                let mut v = first.clone();
                for q in &ratios[..n] {
                    v *= q;
                }
                Number::Exact(v)
            }
            ExactForm::Logs(_) => Number::Approx(Float::with_val(self.precision, self.logs[n].exp_ref())),
            ExactForm::Inexact(values) => Number::Approx(values[n].clone()),
        }
    }

    pub fn values(&self) -> Vec<Number> {
        match &self.exact {
            ExactForm::Ratios { first, ratios } => {
                let mut out = Vec::with_capacity(ratios.len() + 1);
                let mut v = first.clone();
                out.push(Number::Exact(v.clone()));
                for q in ratios {
                    v *= q;
                    out.push(Number::Exact(v.clone()));
                }
                out
            }
            _ => (0..self.len()).map(|n| self.value(n)).collect(),
        }
    }

    /// `M_n / M_{n+1}`.
    pub fn ratio_down(&self, n: usize) -> Number {
        match &self.exact {
            ExactForm::Ratios { ratios, .. } => Number::Exact(Rational::from(ratios[n].recip_ref())),
            ExactForm::Logs(logs) if logs[n] == logs[n + 1] => Number::Exact(Rational::from(1)),
            _ => {
                let d = Float::with_val(self.logs[n].prec(), &self.logs[n] - &self.logs[n + 1]);
                Number::Approx(Float::with_val(self.precision, d.exp_ref()))
            }
        }
    }

    pub fn truncated(&self, len: usize) -> Prefix {
        let exact = match &self.exact {
            ExactForm::Ratios { first, ratios } => ExactForm::Ratios {
                first: first.clone(),
                ratios: ratios[..len - 1].to_vec(),
            },
            ExactForm::Logs(l) => ExactForm::Logs(l[..len].to_vec()),
            ExactForm::Inexact(v) => ExactForm::Inexact(v[..len].to_vec()),
        };
        Prefix {
            logs: self.logs[..len].to_vec(),
            exact,
            precision: self.precision,
        }
    }

    /// Sign of `sum_i c_i ln M_i - ln rhs`.
    ///
    /// A floating-point filter decides clear cases; near-ties are settled
    /// exactly for exact prefixes and by the relative tolerance
    /// `2^-(precision - 56)` for inexact ones.
    pub fn compare_log_combination(&self, terms: &[(usize, i64)], rhs: &Rational) -> Ordering {
        let wp = self.logs[0].prec();
        let ln_rhs = if *rhs == 1 {
            Float::new(wp)
        } else {
            Float::with_val(wp, rhs).ln()
        };
        let mut sum = Float::with_val(wp, -&ln_rhs);
        let mut scale = Float::with_val(wp, ln_rhs.abs_ref()) + 1u32;
        for &(i, c) in terms {
            sum += Float::with_val(wp, c * &self.logs[i]);
            scale += Float::with_val(wp, c.unsigned_abs() * Float::with_val(wp, self.logs[i].abs_ref()));
        }
        let slack_bits = if self.is_exact() {
            self.precision.saturating_sub(8)
        } else {
            self.precision.saturating_sub(SEQUENCE_GUARD_BITS)
        };
        let slack = Float::with_val(wp, &scale >> slack_bits);
        if Float::with_val(wp, sum.abs_ref()) > slack {
            return sum.cmp0().unwrap_or(Ordering::Equal);
        }
        match &self.exact {
            ExactForm::Ratios { first, ratios } => exact_ratio_sign(first, ratios, terms, rhs),
            ExactForm::Logs(logs) => exact_log_sign(logs, terms, rhs, self.precision),
            ExactForm::Inexact(_) => Ordering::Equal,
        }
    }
}

fn exact_ratio_sign(first: &Rational, ratios: &[Rational], terms: &[(usize, i64)], rhs: &Rational) -> Ordering {
    // ln M_i = ln M_0 + sum_{m < i} ln q_m, so the combination is
    // e_0 ln M_0 + sum_m e_m ln q_m with e_m = sum_{i > m} c_i.
    let top = terms.iter().map(|&(i, _)| i).max().unwrap_or(0);
    let mut lhs = Rational::from(1);
    let mut rhs = rhs.clone();
    let apply = |base: &Rational, e: i64, lhs: &mut Rational, rhs: &mut Rational| match e.cmp(&0) {
        Ordering::Greater => *lhs *= base.clone().pow(e as u32),
        Ordering::Less => *rhs *= base.clone().pow(e.unsigned_abs() as u32),
        Ordering::Equal => {}
    };
    let total: i64 = terms.iter().map(|&(_, c)| c).sum();
    apply(first, total, &mut lhs, &mut rhs);
    for (m, q) in ratios.iter().enumerate().take(top) {
        let e: i64 = terms.iter().filter(|&&(i, _)| i > m).map(|&(_, c)| c).sum();
        apply(q, e, &mut lhs, &mut rhs);
    }
    lhs.cmp(&rhs)
}

fn exact_log_sign(logs: &[Rational], terms: &[(usize, i64)], rhs: &Rational, precision: u32) -> Ordering {
    let mut combo = Rational::new();
    for &(i, c) in terms {
        combo += Rational::from(c) * &logs[i];
    }
    if *rhs == 1 {
        return combo.cmp0();
    }
    // e^combo is transcendental unless combo = 0, so the difference is
    // nonzero and more precision eventually separates it.
    let mut bits = precision.max(64) * 2;
    loop {
        let diff = Float::with_val(bits, &combo) - Float::with_val(bits, rhs).ln();
        let magnitude = Float::with_val(bits, diff.abs_ref());
        let floor = Float::with_val(bits, 1) >> (bits - 16);
        if magnitude > floor || bits >= 1 << 16 {
            return diff.cmp0().unwrap_or(Ordering::Equal);
        }
        bits *= 2;
    }
}

#[derive(Debug, Clone)]
enum Source {
    Explicit(Prefix),
    Family(Family),
}

/// A positive weight sequence `(M_n)`, either an explicit prefix or a
/// registry family evaluated on demand.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    name: String,
    source: Source,
}

impl WeightSequence {
    /// Explicit sequence from exact positive values (at least three).
    pub fn from_values(name: impl Into<String>, values: &[Rational]) -> Result<Self, SequenceError> {
        if values.len() < 3 {
            return Err(SequenceError::TooShort(values.len()));
        }
        Ok(Self::explicit(name, Prefix::from_values(values, DEFAULT_PRECISION)?))
    }

    /// Explicit sequence `M_n = exp(logs[n])` with exact rational logarithms.
    pub fn from_logs(name: impl Into<String>, logs: &[Rational]) -> Result<Self, SequenceError> {
        if logs.len() < 3 {
            return Err(SequenceError::TooShort(logs.len()));
        }
        Ok(Self::explicit(name, Prefix::from_logs(logs, DEFAULT_PRECISION)))
    }

    /// Explicit sequence from values known only to working precision.
    pub fn from_floats(name: impl Into<String>, values: &[Float]) -> Result<Self, SequenceError> {
        if values.len() < 3 {
            return Err(SequenceError::TooShort(values.len()));
        }
        let prec = values.iter().map(Float::prec).max().unwrap_or(DEFAULT_PRECISION);
        Ok(Self::explicit(name, Prefix::from_floats(values, prec)?))
    }

    pub fn family(family: Family) -> Self {
        WeightSequence {
            name: family.to_string(),
            source: Source::Family(family),
        }
    }

    pub(crate) fn explicit(name: impl Into<String>, prefix: Prefix) -> Self {
        WeightSequence {
            name: name.into(),
            source: Source::Explicit(prefix),
        }
    }

    /// Re-materializes stored logarithms at a different mantissa width.
    pub fn with_precision(self, bits: u32) -> Self {
        let source = match self.source {
            Source::Explicit(p) => Source::Explicit(p.repriced(bits)),
            Source::Family(f) => Source::Family(f.with_precision(bits)),
        };
        WeightSequence { name: self.name, source }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn kind(&self) -> SequenceKind {
        match self.source {
            Source::Explicit(_) => SequenceKind::Explicit,
            Source::Family(_) => SequenceKind::Family,
        }
    }

    pub fn as_family(&self) -> Option<&Family> {
        match &self.source {
            Source::Family(f) => Some(f),
            Source::Explicit(_) => None,
        }
    }

    pub fn precision(&self) -> u32 {
        match &self.source {
            Source::Explicit(p) => p.precision,
            Source::Family(f) => f.precision(),
        }
    }

    /// Number of stored values; `None` for families.
    pub fn available(&self) -> Option<usize> {
        match &self.source {
            Source::Explicit(p) => Some(p.len()),
            Source::Family(_) => None,
        }
    }

    /// Materializes `M_0..M_{len-1}`.
    pub fn prefix(&self, len: usize) -> Result<Prefix, SequenceError> {
        match &self.source {
            Source::Explicit(p) if p.len() >= len => Ok(if p.len() == len { p.clone() } else { p.truncated(len) }),
            Source::Explicit(p) => Err(SequenceError::InsufficientPrefix {
                needed: len,
                available: p.len(),
            }),
            Source::Family(f) => Ok(f.materialize(len)),
        }
    }

    /// The whole explicit prefix, or `default_len` values of a family.
    pub fn prefix_or(&self, default_len: usize) -> Prefix {
        match &self.source {
            Source::Explicit(p) => p.clone(),
            Source::Family(f) => f.materialize(default_len),
        }
    }

    pub fn value(&self, n: usize) -> Result<Number, SequenceError> {
        match &self.source {
            Source::Family(f) => Ok(f.value(n)),
            Source::Explicit(_) => Ok(self.prefix(n + 1)?.value(n)),
        }
    }
}

impl Prefix {
    fn repriced(&self, bits: u32) -> Prefix {
        match &self.exact {
            ExactForm::Ratios { first, ratios } => Prefix::from_ratios(first.clone(), ratios.clone(), bits),
            ExactForm::Logs(l) => Prefix::from_logs(l, bits),
            ExactForm::Inexact(v) => {
                let v: Vec<Float> = v.iter().map(|x| Float::with_val(bits, x)).collect();
                Prefix::from_floats(&v, bits).expect("values were validated positive")
            }
        }
    }
}
