use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rug::ops::Pow;
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};
use serde::Deserialize;

use super::{measure_sup_derivatives, Grid, HarnessConfig, HarnessError};
use crate::jet::NamedFunction;
use crate::numeric::{parse_rational, Number};
use crate::sequence::Family;

/// The registry of substitution pairs shipped with the crate.
pub const CORPUS_JSON: &str = include_str!("../../data/corpus.json");

/// Where the bounds `M_n >= sup_[0,1] |f^(n)|` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundSource {
    /// `M_n = c` for all `n`.
    Constant(Number),
    /// Explicit nonnegative values `M_0..M_N`.
    Values(Vec<Number>),
    Family(Family),
    /// Grid maxima of `|f^(n)|` over the verification grid plus `{0, 1}`.
    Measure,
}

impl BoundSource {
    /// `const:<expr>`, `values:v0,v1,...`, `family:<descriptor>` or `measure`.
    /// `<expr>` is a rational or `exp(r)`, `cosh(r)`, `sinh(r)`.
    pub fn parse(spec: &str, precision: u32) -> Result<Self, HarnessError> {
        let spec = spec.trim();
        let bad = |m: String| HarnessError::Invalid(format!("bound source `{spec}`: {m}"));
        if spec == "measure" {
            return Ok(BoundSource::Measure);
        }
        if let Some(expr) = spec.strip_prefix("const:") {
            return Ok(BoundSource::Constant(eval_constant(expr, precision).map_err(bad)?));
        }
        if let Some(list) = spec.strip_prefix("values:") {
            let values = list
                .split(',')
                .map(|v| eval_constant(v, precision))
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad)?;
            return Ok(BoundSource::Values(values));
        }
        if let Some(d) = spec.strip_prefix("family:") {
            return Ok(BoundSource::Family(Family::parse(d)?));
        }
        Err(bad("expected const:, values:, family: or measure".into()))
    }

    /// `M_0..M_{len-1}` as floats.
    pub fn resolve(
        &self,
        f: &NamedFunction,
        len: usize,
        grid: &Grid,
        cfg: &HarnessConfig,
    ) -> Result<Vec<Float>, HarnessError> {
        let prec = cfg.precision;
        match self {
            BoundSource::Constant(c) => Ok(vec![c.to_float(prec); len]),
            BoundSource::Values(v) => {
                if v.len() < len {
                    return Err(HarnessError::ShortBounds {
                        needed: len,
                        available: v.len(),
                    });
                }
                Ok(v[..len].iter().map(|x| x.to_float(prec)).collect())
            }
            BoundSource::Family(fam) => Ok((0..len).map(|n| fam.value(n).to_float(prec)).collect()),
            BoundSource::Measure => {
                let g = grid.with(&[Rational::new(), Rational::from(1)]);
                measure_sup_derivatives(f, len.saturating_sub(1), &g, cfg)
            }
        }
    }
}

fn eval_constant(expr: &str, precision: u32) -> Result<Number, String> {
    let expr = expr.trim();
    for name in ["exp", "cosh", "sinh"] {
        if let Some(arg) = expr.strip_prefix(name).and_then(|r| r.strip_prefix('(')).and_then(|r| r.strip_suffix(')')) {
            let x = Float::with_val(precision, parse_rational(arg).map_err(|e| e.to_string())?);
            let v = match name {
                "exp" => x.exp(),
                "cosh" => x.cosh(),
                _ => x.sinh(),
            };
            return Ok(Number::Approx(v));
        }
    }
    let v = parse_rational(expr).map_err(|e| e.to_string())?;
    if v.cmp0() == Ordering::Less {
        return Err("bounds must be nonnegative".into());
    }
    Ok(Number::Exact(v))
}

/// A registered `(f, g, k)` with `f(x) = g(x^k)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionPair {
    pub id: String,
    pub k: u32,
    pub f: NamedFunction,
    pub g: NamedFunction,
    pub bounds: BoundSource,
    pub note: String,
}

/// Largest relative gap between `f(x)` and `g(x^k)` over random points.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub points: Vec<Rational>,
    pub max_relative_error: Float,
    pub pass: bool,
}

impl SubstitutionPair {
    pub fn new(id: &str, k: u32, f: NamedFunction, g: NamedFunction, bounds: BoundSource) -> Result<Self, HarnessError> {
        if k < 2 {
            return Err(HarnessError::Invalid(format!("pair `{id}`: k must be > 1")));
        }
        if !g.smooth_at_zero() {
            return Err(HarnessError::Invalid(format!("pair `{id}`: g must be smooth at 0")));
        }
        Ok(SubstitutionPair {
            id: id.into(),
            k,
            f,
            g,
            bounds,
            note: String::new(),
        })
    }

    /// Checks `f(x) = g(x^k)` at 16 seeded random points of `(0, 1]` within
    /// relative `2^-tolerance_exp`.
    pub fn check_identity(&self, seed: u64, cfg: &HarnessConfig) -> Result<IdentityCheck, HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prec = cfg.precision;
        let tol = cfg.tolerance();
        let mut worst = Float::new(prec);
        let mut points = Vec::with_capacity(16);
        for _ in 0..16 {
            let num: u64 = rng.random_range(1..=(1u64 << 30));
            let x = Rational::from((num, 1u64 << 30));
            let xf = Float::with_val(prec, &x);
            let fx = self.f.value(&xf)?;
            let y = Float::with_val(prec, xf.pow(self.k));
            let gy = self.g.value(&y)?;
            let floor = Float::with_val(prec, 1) >> (prec / 2);
            let scale = Float::with_val(prec, fx.abs_ref()).max(&floor);
            let err = Float::with_val(prec, &fx - &gy).abs() / scale;
            if err > worst {
                worst = err;
            }
            points.push(x);
        }
        let pass = worst <= tol;
        Ok(IdentityCheck {
            points,
            max_relative_error: worst,
            pass,
        })
    }
}

#[derive(Deserialize)]
struct RawCorpus {
    version: u32,
    pairs: Vec<RawPair>,
}

#[derive(Deserialize)]
struct RawPair {
    id: String,
    k: u32,
    f: String,
    g: String,
    bounds: String,
    #[serde(default)]
    note: String,
}

/// Versioned collection of substitution pairs.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub version: u32,
    pub pairs: Vec<SubstitutionPair>,
}

impl Corpus {
    pub fn builtin(precision: u32) -> Self {
        Self::from_json(CORPUS_JSON, precision).expect("shipped corpus is valid")
    }

    pub fn from_json(text: &str, precision: u32) -> Result<Self, HarnessError> {
        let raw: RawCorpus = serde_json::from_str(text).map_err(|e| HarnessError::Invalid(format!("corpus: {e}")))?;
        let pairs = raw
            .pairs
            .into_iter()
            .map(|p| {
                let mut pair = SubstitutionPair::new(
                    &p.id,
                    p.k,
                    NamedFunction::parse(&p.f)?,
                    NamedFunction::parse(&p.g)?,
                    BoundSource::parse(&p.bounds, precision)?,
                )?;
                pair.note = p.note;
                Ok(pair)
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        Ok(Corpus {
            version: raw.version,
            pairs,
        })
    }

    pub fn get(&self, id: &str) -> Result<&SubstitutionPair, HarnessError> {
        self.pairs
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| HarnessError::UnknownPair(id.into()))
    }
}
