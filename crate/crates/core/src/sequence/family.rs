use std::collections::BTreeMap;
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Rational};

use super::{Prefix, SequenceError, LOG_GUARD_BITS};
use crate::numeric::{parse_rational, Number, DEFAULT_PRECISION};

/// Closed-form weight sequences with known quasianalyticity behaviour.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `M_n = c * b^n * (n!)^s`.
    Gevrey { s: Rational, b: Rational, c: Rational, precision: u32 },
    /// `M_n = c`.
    Constant { c: Rational, precision: u32 },
    /// `M_n = n! * ln(n + e)^(s n)`.
    DenjoyLog { s: Rational, precision: u32 },
}

impl Family {
    pub fn gevrey(s: impl Into<Rational>) -> Self {
        Family::Gevrey {
            s: s.into(),
            b: Rational::from(1),
            c: Rational::from(1),
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        Family::Constant {
            c: c.into(),
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Family::Gevrey { .. } => "gevrey",
            Family::Constant { .. } => "constant",
            Family::DenjoyLog { .. } => "denjoy_log",
        }
    }

    /// Parses `id`, `id:value` (the family's main parameter) or
    /// `id:key=value,key=value`.
    pub fn parse(descriptor: &str) -> Result<Self, SequenceError> {
        let (id, rest) = descriptor.split_once(':').unwrap_or((descriptor, ""));
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => params.insert(k.trim().to_string(), v.trim().to_string()),
                None => params.insert(main_parameter(id).to_string(), item.to_string()),
            };
        }
        Self::from_params(id.trim(), &params)
    }

    pub fn from_params(id: &str, params: &BTreeMap<String, String>) -> Result<Self, SequenceError> {
        let bad = |message: String| SequenceError::BadParameter {
            family: id.to_string(),
            message,
        };
        let get = |key: &str, default: i64| -> Result<Rational, SequenceError> {
            match params.get(key) {
                Some(v) => Ok(parse_rational(v)?),
                None => Ok(Rational::from(default)),
            }
        };
        let allowed: &[&str] = match id {
            "gevrey" => &["s", "b", "c"],
            "constant" => &["c"],
            "denjoy_log" => &["s"],
            _ => return Err(SequenceError::UnknownFamily(id.to_string())),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(bad(format!("unknown parameter `{k}`")));
        }
        let family = match id {
            "gevrey" => Family::Gevrey {
                s: get("s", 1)?,
                b: get("b", 1)?,
                c: get("c", 1)?,
                precision: DEFAULT_PRECISION,
            },
            "constant" => Family::Constant {
                c: get("c", 1)?,
                precision: DEFAULT_PRECISION,
            },
            _ => Family::DenjoyLog {
                s: get("s", 1)?,
                precision: DEFAULT_PRECISION,
            },
        };
        family.validate().map_err(bad)?;
        Ok(family)
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            Family::Gevrey { s, b, c, .. } => {
                if s.cmp0().is_lt() {
                    return Err("s must be >= 0".into());
                }
                if b.cmp0().is_le() || c.cmp0().is_le() {
                    return Err("b and c must be > 0".into());
                }
            }
            Family::Constant { c, .. } if c.cmp0().is_le() => return Err("c must be > 0".into()),
            Family::DenjoyLog { s, .. } if s.cmp0().is_lt() => return Err("s must be >= 0".into()),
            _ => {}
        }
        Ok(())
    }

    /// Parameters in a stable order, as decimal/fraction strings.
    pub fn params(&self) -> Vec<(&'static str, String)> {
        match self {
            Family::Gevrey { s, b, c, .. } => vec![("s", s.to_string()), ("b", b.to_string()), ("c", c.to_string())],
            Family::Constant { c, .. } => vec![("c", c.to_string())],
            Family::DenjoyLog { s, .. } => vec![("s", s.to_string())],
        }
    }

    pub fn precision(&self) -> u32 {
        match self {
            Family::Gevrey { precision, .. } | Family::Constant { precision, .. } | Family::DenjoyLog { precision, .. } => {
                *precision
            }
        }
    }

    pub(crate) fn with_precision(mut self, bits: u32) -> Self {
        match &mut self {
            Family::Gevrey { precision, .. } | Family::Constant { precision, .. } | Family::DenjoyLog { precision, .. } => {
                *precision = bits
            }
        }
        self
    }

    /// Exact `M_{n+1}/M_n` when the family is rational-valued.
    fn exact_step(&self, n: usize) -> Option<Rational> {
        match self {
            Family::Gevrey { s, b, .. } if *s.denom() == 1 => {
                let s = s.numer().to_u32()?;
                Some(Rational::from(b * Rational::from(n as u64 + 1).pow(s)))
            }
            Family::Constant { .. } => Some(Rational::from(1)),
            _ => None,
        }
    }

    fn exact_first(&self) -> Option<Rational> {
        match self {
            Family::Gevrey { c, s, .. } if *s.denom() == 1 => Some(c.clone()),
            Family::Constant { c, .. } => Some(c.clone()),
            _ => None,
        }
    }

    /// Closed-form `M_n / M_{n+1}`, exact when the family is rational-valued.
    pub fn ratio(&self, n: usize) -> Number {
        if let Some(q) = self.exact_step(n) {
            return Number::Exact(q.recip());
        }
        let prec = self.precision();
        let logs = self.float_logs(n + 2);
        let d = Float::with_val(logs[0].prec(), &logs[n] - &logs[n + 1]);
        Number::Approx(Float::with_val(prec, d.exp_ref()))
    }

    pub fn value(&self, n: usize) -> Number {
        self.materialize(n + 1).value(n)
    }

    pub(crate) fn materialize(&self, len: usize) -> Prefix {
        let prec = self.precision();
        match self.exact_first() {
            Some(first) => {
                let ratios = (0..len.saturating_sub(1))
                    .map(|n| self.exact_step(n).expect("rational-valued family"))
                    .collect();
                Prefix::from_ratios(first, ratios, prec)
            }
            None => Prefix::from_float_logs(self.float_logs(len), prec),
        }
    }

    fn float_logs(&self, len: usize) -> Vec<Float> {
        let wp = self.precision() + LOG_GUARD_BITS;
        let mut out = Vec::with_capacity(len);
        let mut ln_fact = Float::new(wp);
        for n in 0..len {
            if n > 0 {
                ln_fact += Float::with_val(wp, n as u64).ln();
            }
            let l = match self {
                Family::Gevrey { s, b, c, .. } => {
                    let mut l = Float::with_val(wp, c).ln();
                    l += Float::with_val(wp, b).ln() * Float::with_val(wp, n as u64);
                    l += Float::with_val(wp, s) * &ln_fact;
                    l
                }
                Family::Constant { c, .. } => Float::with_val(wp, c).ln(),
                Family::DenjoyLog { s, .. } => {
                    let e = Float::with_val(wp, 1).exp();
                    let lnln = Float::with_val(wp, n as u64 + e).ln().ln();
                    Float::with_val(wp, &ln_fact + Float::with_val(wp, s * Rational::from(n as u64)) * lnln)
                }
            };
            out.push(l);
        }
        out
    }
}

fn main_parameter(id: &str) -> &'static str {
    match id {
        "constant" => "c",
        _ => "s",
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gevrey { s, b, c, .. } => {
                write!(f, "gevrey(s={s}")?;
                if *b != 1 {
                    write!(f, ",b={b}")?;
                }
                if *c != 1 {
                    write!(f, ",c={c}")?;
                }
                f.write_str(")")
            }
            Family::Constant { c, .. } => write!(f, "constant(c={c})"),
            Family::DenjoyLog { s, .. } => write!(f, "denjoy_log(s={s})"),
        }
    }
}
