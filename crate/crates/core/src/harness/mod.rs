//! Grid certification of derivative bounds for power substitutions.
//!
//! Suprema over compact sets are replaced by maxima over finite grids, so a
//! passing report certifies grid inequalities, not true suprema.

mod corpus;
mod examples;
mod suites;

use std::cmp::Ordering;
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::jet::{JetError, NamedFunction, OrderBudget};
use crate::numeric::{parse_rational, tolerance, within_bound, DEFAULT_PRECISION, DEFAULT_TOLERANCE_EXP};
use crate::sequence::SequenceError;
use crate::substitution::SubstitutionError;

pub use corpus::{BoundSource, Corpus, IdentityCheck, SubstitutionPair, CORPUS_JSON};
pub use examples::{example1_report, example2_build, CoefficientFamily, Example2, FlatnessRow};
pub use suites::{
    certify_premise, verify_lemma32, verify_lemma41, verify_prop2, verify_theorem1, verify_zero_bound,
    Deriv0Check, PremiseCertificate,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("bad grid `{0}`: expected `dyadic:J` with J >= 1 or a comma list of points in [0, 1]")]
    BadGrid(String),
    #[error("bound list too short: need {needed} values, have {available}")]
    ShortBounds { needed: usize, available: usize },
    #[error("unknown pair `{0}`")]
    UnknownPair(String),
    #[error("{0}")]
    Invalid(String),
    #[error("hypothesis certification missing or invalid: {0}")]
    Premise(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
}

/// Numeric settings shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarnessConfig {
    pub precision: u32,
    /// Bound checks pass iff `actual <= bound * (1 + 2^-tolerance_exp)`.
    pub tolerance_exp: u32,
    /// Fitted `B`/`C` above `2^ceiling_exp` fail.
    pub ceiling_exp: u32,
    pub budget: OrderBudget,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            precision: DEFAULT_PRECISION,
            tolerance_exp: DEFAULT_TOLERANCE_EXP,
            ceiling_exp: 10,
            budget: OrderBudget::default(),
        }
    }
}

impl HarnessConfig {
    pub fn tolerance(&self) -> Float {
        tolerance(self.precision, self.tolerance_exp)
    }

    pub fn ceiling(&self) -> Float {
        Float::with_val(self.precision, Float::u_exp(1, self.ceiling_exp as i32))
    }

    pub(crate) fn float(&self, v: impl Into<Rational>) -> Float {
        Float::with_val(self.precision, v.into())
    }
}

/// Finite point set in `[0, 1]`, kept exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    points: Vec<Rational>,
}

impl Grid {
    /// `{2^-1, ..., 2^-J}`.
    pub fn dyadic(j: u32) -> Result<Self, HarnessError> {
        if j == 0 {
            return Err(HarnessError::BadGrid(format!("dyadic:{j}")));
        }
        let points = (1..=j).map(|e| Rational::from((1, Integer::from(1) << e))).collect();
        Ok(Grid { points })
    }

    pub fn from_points(mut points: Vec<Rational>) -> Result<Self, HarnessError> {
        if points.is_empty() {
            return Err(HarnessError::EmptyGrid);
        }
        if let Some(p) = points.iter().find(|p| p.cmp0() == Ordering::Less || **p > 1) {
            return Err(HarnessError::BadGrid(p.to_string()));
        }
        points.sort_by(|a, b| b.cmp(a));
        points.dedup();
        Ok(Grid { points })
    }

    /// `dyadic:J` or `p1,p2,...`.
    pub fn parse(spec: &str) -> Result<Self, HarnessError> {
        let bad = || HarnessError::BadGrid(spec.to_string());
        if let Some(j) = spec.trim().strip_prefix("dyadic:") {
            return Self::dyadic(j.trim().parse().map_err(|_| bad())?);
        }
        let points = spec
            .split(',')
            .map(|p| parse_rational(p).map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_points(points).map_err(|_| bad())
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    /// Points with `x > 0`.
    pub fn positive(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.points.iter().filter(|p| p.cmp0() == Ordering::Greater)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.points.contains(x)
    }

    /// The grid with extra points added (kept sorted, deduplicated).
    pub fn with(&self, extra: &[Rational]) -> Grid {
        let mut points = self.points.clone();
        points.extend_from_slice(extra);
        Grid::from_points(points).expect("extra points lie in [0, 1]")
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Outcome::Pass
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
        })
    }
}

/// One checked inequality `actual <= bound` at `(n, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    /// Lower derivative order for two-index bounds.
    pub ell: Option<usize>,
    pub x: Rational,
    pub actual: Float,
    pub bound: Float,
    pub ratio: Float,
    pub branch: String,
    pub pass: bool,
}

impl ReportRow {
    pub(crate) fn new(n: usize, x: Rational, actual: Float, bound: Float, branch: impl Into<String>, tol: &Float) -> Self {
        let ratio = ratio_of(&actual, &bound);
        let pass = within_bound(&actual, &bound, tol);
        ReportRow {
            n,
            ell: None,
            x,
            actual,
            bound,
            ratio,
            branch: branch.into(),
            pass,
        }
    }
}

fn ratio_of(actual: &Float, bound: &Float) -> Float {
    let prec = actual.prec().max(bound.prec());
    if bound.is_zero() {
        return if actual.is_zero() {
            Float::new(prec)
        } else {
            Float::with_val(prec, rug::float::Special::Infinity)
        };
    }
    Float::with_val(prec, actual / bound)
}

/// Fitted class constants: `A` and the growth constant (`B` or `C`).
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub a: Float,
    pub growth: Float,
    /// `"B"` or `"C"`.
    pub growth_name: &'static str,
    /// Normalized maxima `D_n` the constants were fitted from.
    pub normalized: Vec<Float>,
}

impl Fit {
    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.growth.is_finite()
    }

    /// `A * growth^n`.
    pub fn scale(&self, n: usize) -> Float {
        let prec = self.a.prec();
        Float::with_val(prec, &self.a * Float::with_val(prec, (&self.growth).pow(n as u32)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub pair: String,
    pub grid: Grid,
    pub orders: usize,
    pub precision: u32,
    pub tolerance_exp: u32,
    pub rows: Vec<ReportRow>,
    pub fit: Option<Fit>,
    pub verdict: Outcome,
    /// Index into `rows` of the largest ratio.
    pub worst: Option<usize>,
    pub deriv0: Option<Deriv0Check>,
    pub premise: Option<PremiseCertificate>,
    pub flatness: Vec<FlatnessRow>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub(crate) fn new(suite: &str, pair: &str, grid: &Grid, orders: usize, cfg: &HarnessConfig) -> Self {
        VerificationReport {
            suite: suite.into(),
            pair: pair.into(),
            grid: grid.clone(),
            orders,
            precision: cfg.precision,
            tolerance_exp: cfg.tolerance_exp,
            rows: Vec::new(),
            fit: None,
            verdict: Outcome::Fail,
            worst: None,
            deriv0: None,
            premise: None,
            flatness: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Sets `worst` and returns whether every row passed.
    pub(crate) fn finish_rows(&mut self) -> bool {
        self.worst = (0..self.rows.len()).reduce(|best, i| {
            match self.rows[i].ratio.partial_cmp(&self.rows[best].ratio) {
                Some(Ordering::Greater) => i,
                _ => best,
            }
        });
        self.rows.iter().all(|r| r.pass)
    }

    pub fn worst_row(&self) -> Option<&ReportRow> {
        self.worst.map(|i| &self.rows[i])
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// `(|h^(n)(x)|)` for `n <= order` from one jet.
pub(crate) fn abs_derivatives(
    h: &NamedFunction,
    x: &Rational,
    order: usize,
    cfg: &HarnessConfig,
) -> Result<Vec<Float>, HarnessError> {
    let jet = h.jet(&cfg.float(x.clone()), order, cfg.budget)?;
    Ok(jet.derivatives().into_iter().map(|d| d.abs()).collect())
}

/// Grid maximum of `|h^(n)|` for each `n <= order`; a lower estimate of the
/// true supremum.
pub fn measure_sup_derivatives(
    h: &NamedFunction,
    order: usize,
    grid: &Grid,
    cfg: &HarnessConfig,
) -> Result<Vec<Float>, HarnessError> {
    if grid.points().is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let mut sup = vec![Float::new(cfg.precision); order + 1];
    for x in grid.points() {
        for (s, d) in sup.iter_mut().zip(abs_derivatives(h, x, order, cfg)?) {
            if d > *s {
                *s = d;
            }
        }
    }
    Ok(sup)
}

/// Samples `|g^(n)(x)|` for a membership query.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub n: usize,
    pub x: Rational,
    pub value: Float,
}

/// Data for fitting `|g^(n)(x)| <= A B^n M_n / |x|^(a n)`.
#[derive(Debug, Clone)]
pub struct ClassMembershipQuery {
    /// `M_0..M_N`, nonnegative.
    pub m: Vec<Float>,
    pub a: Rational,
    pub samples: Vec<Sample>,
}

/// `D_n = max |g^(n)(x)| |x|^(a n) / M_n`, `A = max(D_0, 1)`,
/// `B = max_{n >= 1} (D_n / A)^(1/n)`.
///
/// Samples at `x = 0` are ignored when `a > 0`. A zero `M_n` paired with a
/// nonzero sample makes `D_n` infinite.
pub fn fit_class_constants(query: &ClassMembershipQuery) -> Fit {
    let prec = query.m.first().map(Float::prec).unwrap_or(DEFAULT_PRECISION);
    let mut d = vec![Float::new(prec); query.m.len()];
    let skip_zero = query.a.cmp0() == Ordering::Greater;
    for s in &query.samples {
        if s.n >= d.len() || (skip_zero && s.x.cmp0() == Ordering::Equal) {
            continue;
        }
        let weight = if skip_zero {
            let e = Float::with_val(prec, Rational::from(&query.a * Rational::from(s.n)));
            Float::with_val(prec, Float::with_val(prec, &s.x).pow(&e))
        } else {
            Float::with_val(prec, 1)
        };
        let scaled = Float::with_val(prec, &s.value * weight);
        let dn = ratio_of(&scaled, &query.m[s.n]);
        if dn > d[s.n] {
            d[s.n] = dn;
        }
    }
    fit_normalized(d, "B")
}

/// Constants from already-normalized maxima `D_n`.
pub fn fit_normalized(d: Vec<Float>, growth_name: &'static str) -> Fit {
    let prec = d.first().map(Float::prec).unwrap_or(DEFAULT_PRECISION);
    let one = Float::with_val(prec, 1);
    let a = d.first().map_or(one.clone(), |d0| if *d0 > one { d0.clone() } else { one.clone() });
    let mut growth = Float::new(prec);
    for (n, dn) in d.iter().enumerate().skip(1) {
        if dn.is_zero() {
            continue;
        }
        let root = Float::with_val(prec, dn / &a).root(n as u32);
        if root > growth {
            growth = root;
        }
    }
    Fit {
        a,
        growth,
        growth_name,
        normalized: d,
    }
}
