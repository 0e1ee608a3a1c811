use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Float, Rational};

use super::{
    abs_derivatives, fit_class_constants, ClassMembershipQuery, Grid, HarnessConfig, HarnessError, Outcome, ReportRow,
    Sample, VerificationReport,
};
use crate::jet::NamedFunction;
use crate::numeric::{factorial, parse_rational};

/// Behaviour of `|g^(n)(x)|` as `x -> 0` along the grid for one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessRow {
    pub n: usize,
    pub smallest_x: Rational,
    pub value_at_smallest: Float,
    /// Values strictly decrease over the three smallest grid points.
    pub decreasing_tail: bool,
    /// Grid point where `|g^(n)(x)| / bound` is largest.
    pub argmax_ratio_x: Rational,
}

fn cauchy_bound(n: usize, x: &Float, scale: &Float) -> Float {
    // scale * n! (1/x)^n
    let prec = x.prec();
    let inv = Float::with_val(prec, x.recip_ref());
    let p = Float::with_val(prec, inv.pow(n as u32));
    Float::with_val(prec, p * Float::with_val(prec, factorial(n as u32))) * scale
}

/// `|g^(n)(x)| <= n! 2^n / x^n` for `g(x) = e^(-1/x)`, plus flatness evidence.
pub fn example1_report(orders: usize, grid: &Grid, cfg: &HarnessConfig) -> Result<VerificationReport, HarnessError> {
    if grid.points().iter().any(|x| x.cmp0() != Ordering::Greater) {
        return Err(HarnessError::Invalid("example 1 needs a grid in (0, 1]".into()));
    }
    let g = NamedFunction::ExpNegInv;
    let tol = cfg.tolerance();
    let mut report = VerificationReport::new("example1", "exp_neg_inv", grid, orders, cfg);
    let derivs = grid
        .points()
        .iter()
        .map(|x| Ok((x.clone(), abs_derivatives(&g, x, orders, cfg)?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    for n in 0..=orders {
        let two_n = Float::with_val(cfg.precision, Float::u_exp(1, n as i32));
        let start = report.rows.len();
        for (x, d) in &derivs {
            let bound = cauchy_bound(n, &cfg.float(x.clone()), &two_n);
            report.rows.push(ReportRow::new(n, x.clone(), d[n].clone(), bound, "cauchy", &tol));
        }
        let rows = &report.rows[start..];
        let argmax = (0..rows.len())
            .reduce(|b, i| if rows[i].ratio > rows[b].ratio { i } else { b })
            .expect("grid is nonempty");
        let tail: Vec<&Float> = derivs.iter().rev().take(3).map(|(_, d)| &d[n]).collect();
        let decreasing_tail = tail.len() == 3 && tail[0] < tail[1] && tail[1] < tail[2];
        let (smallest_x, last) = derivs.last().expect("grid is nonempty");
        report.flatness.push(FlatnessRow {
            n,
            smallest_x: smallest_x.clone(),
            value_at_smallest: last[n].clone(),
            decreasing_tail,
            argmax_ratio_x: rows[argmax].x.clone(),
        });
    }
    report.notes.push("g^(n)(0) = 0 for every n; flatness is recorded per n, not asserted".into());
    let ok = report.finish_rows();
    report.verdict = Outcome::from_bool(ok);
    Ok(report)
}

/// Fourier coefficients `a_j`, `j` in `Z`, for the truncated construction.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFamily {
    /// `a_j = (1 + |j|)^(-p)`.
    Power(u32),
    /// `a_j = r^|j|`.
    Geometric(Rational),
    /// `a_0, a_1, ...` used for both signs of `j`.
    Explicit(Vec<Rational>),
}

impl CoefficientFamily {
    /// `power:p`, `geometric:r` or `explicit:a0,a1,...`.
    pub fn parse(spec: &str) -> Result<Self, HarnessError> {
        let bad = || HarnessError::Invalid(format!("coefficient family `{spec}`"));
        let (id, arg) = spec.split_once(':').ok_or_else(bad)?;
        match id.trim() {
            "power" => Ok(CoefficientFamily::Power(arg.trim().parse().map_err(|_| bad())?)),
            "geometric" => Ok(CoefficientFamily::Geometric(parse_rational(arg).map_err(|_| bad())?)),
            "explicit" => Ok(CoefficientFamily::Explicit(
                arg.split(',').map(parse_rational).collect::<Result<_, _>>().map_err(|_| bad())?,
            )),
            _ => Err(bad()),
        }
    }

    pub fn coefficient(&self, j: i64) -> Rational {
        let m = j.unsigned_abs();
        match self {
            CoefficientFamily::Power(p) => Rational::from((1, (rug::Integer::from(m + 1)).pow(*p))),
            CoefficientFamily::Geometric(r) => Rational::from(r.pow(m as u32)),
            CoefficientFamily::Explicit(v) => v.get(m as usize).cloned().unwrap_or_default(),
        }
    }
}

/// The truncated `h_+` and `h_-` with their class-membership reports.
#[derive(Debug, Clone)]
pub struct Example2 {
    pub h_plus: NamedFunction,
    pub h_minus: NamedFunction,
    pub plus: VerificationReport,
    pub minus: VerificationReport,
}

/// Builds `h_+ = sum_{j=0}^J a_j e^(-jx)` and `h_- = sum_{j=1}^J a_{-j} e^(-jx)`
/// and fits `|h^(n)(x)| <= A B^n n! / x^n` on the grid.
pub fn example2_build(
    family: &CoefficientFamily,
    truncation: usize,
    orders: usize,
    grid: &Grid,
    cfg: &HarnessConfig,
) -> Result<Example2, HarnessError> {
    if truncation < 1 {
        return Err(HarnessError::Invalid("truncation J must be >= 1".into()));
    }
    let coeffs: Vec<Rational> = (0..=truncation as i64).map(|j| family.coefficient(j)).collect();
    if coeffs.iter().any(|a| a.cmp0() == Ordering::Less) || coeffs.windows(2).any(|w| w[1] > w[0]) {
        return Err(HarnessError::Invalid(
            "coefficients must be nonnegative and nonincreasing in |j|".into(),
        ));
    }
    let minus: Vec<Rational> = (0..=truncation as i64)
        .map(|j| if j == 0 { Rational::new() } else { family.coefficient(-j) })
        .collect();
    let h_plus = NamedFunction::ExpDecayFourier(coeffs);
    let h_minus = NamedFunction::ExpDecayFourier(minus);
    let plus = class_report("example2+", &h_plus, orders, grid, cfg)?;
    let minus = class_report("example2-", &h_minus, orders, grid, cfg)?;
    Ok(Example2 {
        h_plus,
        h_minus,
        plus,
        minus,
    })
}

fn class_report(
    suite: &str,
    h: &NamedFunction,
    orders: usize,
    grid: &Grid,
    cfg: &HarnessConfig,
) -> Result<VerificationReport, HarnessError> {
    let m: Vec<Float> = (0..=orders).map(|n| Float::with_val(cfg.precision, factorial(n as u32))).collect();
    let mut samples = Vec::new();
    let mut derivs = Vec::new();
    for x in grid.positive() {
        let d = abs_derivatives(h, x, orders, cfg)?;
        for (n, v) in d.iter().enumerate() {
            samples.push(Sample {
                n,
                x: x.clone(),
                value: v.clone(),
            });
        }
        derivs.push((x.clone(), d));
    }
    let fit = fit_class_constants(&ClassMembershipQuery {
        m,
        a: Rational::from(1),
        samples,
    });
    let mut report = VerificationReport::new(suite, &h.to_string(), grid, orders, cfg);
    let tol = cfg.tolerance();
    if fit.is_finite() {
        for n in 0..=orders {
            let scale = fit.scale(n);
            for (x, d) in &derivs {
                let bound = cauchy_bound(n, &cfg.float(x.clone()), &scale);
                report.rows.push(ReportRow::new(n, x.clone(), d[n].clone(), bound, "class", &tol));
            }
        }
    }
    let ok = report.finish_rows();
    report.verdict = Outcome::from_bool(ok && fit.is_finite() && fit.growth <= cfg.ceiling());
    report.fit = Some(fit);
    Ok(report)
}
