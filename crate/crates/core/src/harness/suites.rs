use rug::ops::Pow;
use rug::{Float, Rational};

use super::{
    abs_derivatives, fit_normalized, BoundSource, Grid, HarnessConfig, HarnessError, Outcome, ReportRow,
    SubstitutionPair, VerificationReport,
};
use crate::jet::{Jet, JetError, NamedFunction};
use crate::numeric::{factorial, within_bound, Number};
use crate::sequence::{check_factorial_monotone, power_transform_values, WeightSequence};
use crate::substitution::{add_smooth_bound, log_bound, power_sub_bound};

fn bounds_for(
    pair: &SubstitutionPair,
    source: Option<&BoundSource>,
    len: usize,
    grid: &Grid,
    cfg: &HarnessConfig,
) -> Result<Vec<Float>, HarnessError> {
    source.unwrap_or(&pair.bounds).resolve(&pair.f, len, grid, cfg)
}

fn identity_note(pair: &SubstitutionPair, report: &mut VerificationReport, cfg: &HarnessConfig) -> Result<bool, HarnessError> {
    let id = pair.check_identity(0x5eed, cfg)?;
    report.notes.push(format!(
        "identity f(x) = g(x^{}) at {} random points: max relative error {}",
        pair.k,
        id.points.len(),
        crate::numeric::format_float(&Float::with_val(53, &id.max_relative_error))
    ));
    Ok(id.pass)
}

/// `|g^(n)(x)| <= 2^n M_n x^(-(1-1/k) n)` for `n <= orders` and grid `x > 0`.
pub fn verify_theorem1(
    pair: &SubstitutionPair,
    orders: usize,
    grid: &Grid,
    bounds: Option<&BoundSource>,
    cfg: &HarnessConfig,
) -> Result<VerificationReport, HarnessError> {
    let m = bounds_for(pair, bounds, orders + 1, grid, cfg)?;
    let mut report = VerificationReport::new("theorem1", &pair.id, grid, orders, cfg);
    let identity = identity_note(pair, &mut report, cfg)?;
    let tol = cfg.tolerance();
    let derivs = grid
        .positive()
        .map(|x| Ok((x.clone(), abs_derivatives(&pair.g, x, orders, cfg)?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    for n in 0..=orders {
        for (x, d) in &derivs {
            let bound = power_sub_bound(&m[n], pair.k, n, &cfg.float(x.clone()))?;
            report.rows.push(ReportRow::new(n, x.clone(), d[n].clone(), bound, "power-sub", &tol));
        }
    }
    if grid.points().len() != derivs.len() {
        report.notes.push("x = 0 skipped: the bound is singular there".into());
    }
    report.notes.push("grid maxima certify grid inequalities, not true suprema".into());
    let ok = report.finish_rows();
    report.verdict = Outcome::from_bool(ok && identity);
    Ok(report)
}

/// Exact (or float) check of `g^(n)(0)/n! = f^(kn)(0)/(kn)!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deriv0Check {
    pub orders: usize,
    pub exact: bool,
    pub holds: bool,
    pub mismatches: Vec<usize>,
}

fn deriv0_check(pair: &SubstitutionPair, orders: usize, cfg: &HarnessConfig) -> Result<Deriv0Check, HarnessError> {
    let k = pair.k as usize;
    let zero = Rational::new();
    let exact = (|| -> Result<Option<Vec<usize>>, JetError> {
        let g = match pair.g.jet(&zero, orders, cfg.budget) {
            Ok(j) => j,
            Err(JetError::NotRepresentable(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let f = match pair.f.jet(&zero, orders * k, cfg.budget) {
            Ok(j) => j,
            Err(JetError::NotRepresentable(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some((0..=orders).filter(|&n| g.coeffs()[n] != f.coeffs()[k * n]).collect()))
    })()?;
    if let Some(mismatches) = exact {
        return Ok(Deriv0Check {
            orders,
            exact: true,
            holds: mismatches.is_empty(),
            mismatches,
        });
    }
    let zf = Float::new(cfg.precision);
    let g = pair.g.jet(&zf, orders, cfg.budget)?;
    let f = pair.f.jet(&zf, orders * k, cfg.budget)?;
    let tol = cfg.tolerance();
    let mismatches: Vec<usize> = (0..=orders)
        .filter(|&n| {
            let a = &g.coeffs()[n];
            let b = &f.coeffs()[k * n];
            let gap = Float::with_val(cfg.precision, a - b).abs();
            let scale = Float::with_val(cfg.precision, b.abs_ref());
            !within_bound(&gap, &Float::with_val(cfg.precision, &scale * &tol), &tol)
        })
        .collect();
    Ok(Deriv0Check {
        orders,
        exact: false,
        holds: mismatches.is_empty(),
        mismatches,
    })
}

/// Fits `|g^(n)(x)| <= A B^n M^(k)_n` over the grid plus `x = 0` and checks
/// the Taylor identity at 0.
pub fn verify_prop2(
    pair: &SubstitutionPair,
    orders: usize,
    grid: &Grid,
    bounds: Option<&BoundSource>,
    cfg: &HarnessConfig,
) -> Result<VerificationReport, HarnessError> {
    let grid = grid.with(&[Rational::new()]);
    let k = pair.k;
    let m = bounds_for(pair, bounds, orders * k as usize + 2, &grid, cfg)?;
    let m_numbers: Vec<Number> = m.iter().map(|v| Number::Approx(v.clone())).collect();
    let mk: Vec<Float> = power_transform_values(&m_numbers, k, orders, cfg.precision)?
        .iter()
        .map(|v| v.to_float(cfg.precision))
        .collect();
    let mut report = VerificationReport::new("prop2", &pair.id, &grid, orders, cfg);
    let identity = identity_note(pair, &mut report, cfg)?;
    let derivs = grid
        .points()
        .iter()
        .map(|x| Ok((x.clone(), abs_derivatives(&pair.g, x, orders, cfg)?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut d = vec![Float::new(cfg.precision); orders + 1];
    for (_, vals) in &derivs {
        for n in 0..=orders {
            let r = super::ratio_of(&vals[n], &mk[n]);
            if r > d[n] {
                d[n] = r;
            }
        }
    }
    let fit = fit_normalized(d, "B");
    let tol = cfg.tolerance();
    for n in 0..=orders {
        let bound = Float::with_val(cfg.precision, fit.scale(n) * &mk[n]);
        for (x, vals) in &derivs {
            report.rows.push(ReportRow::new(n, x.clone(), vals[n].clone(), bound.clone(), "class", &tol));
        }
    }
    let deriv0 = deriv0_check(pair, orders, cfg)?;
    let ok = report.finish_rows();
    let fit_ok = fit.is_finite() && fit.growth <= cfg.ceiling();
    report.verdict = Outcome::from_bool(ok && fit_ok && deriv0.holds && identity);
    report.fit = Some(fit);
    report.deriv0 = Some(deriv0);
    Ok(report)
}

/// Grid certificate of `|g^(n)(x)| <= c M_n x^(-a n)` on the grid plus
/// `x = 1`, with the smallest such `c >= 1`, and of `M_n/n!` nondecreasing.
/// Lemmas are then applied to `g / c`.
#[derive(Debug, Clone, PartialEq)]
pub struct PremiseCertificate {
    pub function: String,
    pub a: Rational,
    pub orders: usize,
    pub grid: Grid,
    pub scale: Float,
}

pub fn certify_premise(
    g: &NamedFunction,
    m: &WeightSequence,
    a: &Rational,
    orders: usize,
    grid: &Grid,
    cfg: &HarnessConfig,
) -> Result<PremiseCertificate, HarnessError> {
    if !check_factorial_monotone(m, orders)? {
        return Err(HarnessError::Premise(format!("M_n/n! is not nondecreasing on 0..={orders}")));
    }
    let mf: Vec<Float> = (0..=orders)
        .map(|n| Ok(m.value(n)?.to_float(cfg.precision)))
        .collect::<Result<_, HarnessError>>()?;
    let points = grid.with(&[Rational::from(1)]);
    let mut scale = Float::with_val(cfg.precision, 1);
    for x in points.positive() {
        let d = abs_derivatives(g, x, orders, cfg)?;
        let xf = cfg.float(x.clone());
        for n in 0..=orders {
            let e = Float::with_val(cfg.precision, Rational::from(a * Rational::from(n)));
            let w = Float::with_val(cfg.precision, (&xf).pow(&e));
            let r = super::ratio_of(&Float::with_val(cfg.precision, &d[n] * w), &mf[n]);
            if r > scale {
                scale = r;
            }
        }
    }
    if !scale.is_finite() {
        return Err(HarnessError::Premise("derivative bound is violated where M_n = 0".into()));
    }
    Ok(PremiseCertificate {
        function: g.to_string(),
        a: a.clone(),
        orders,
        grid: grid.clone(),
        scale,
    })
}

/// `|g^(ell)(x)| <= c * 2^n (ell!/n!) M_n * factor` for all `ell <= n <= orders`,
/// grid `x > 0`, where `c` is the certified premise scale for exponent `1 - sigma`.
pub fn verify_lemma32(
    pair: &SubstitutionPair,
    sigma: &Rational,
    m: &WeightSequence,
    orders: usize,
    grid: &Grid,
    cfg: &HarnessConfig,
) -> Result<VerificationReport, HarnessError> {
    let a = Rational::from(1 - sigma);
    let premise = certify_premise(&pair.g, m, &a, orders, grid, cfg)?;
    let mut report = VerificationReport::new("lemma32", &pair.id, grid, orders, cfg);
    let tol = cfg.tolerance();
    let derivs = grid
        .positive()
        .map(|x| Ok((x.clone(), abs_derivatives(&pair.g, x, orders, cfg)?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut covered = [0usize; 3];
    for n in 0..=orders {
        let mn = m.value(n)?.to_float(cfg.precision);
        for ell in 0..=n {
            for (x, d) in &derivs {
                let b = add_smooth_bound(&mn, sigma, n, ell, &cfg.float(x.clone()))?;
                covered[match b.case {
                    crate::substitution::BoundCase::EllAbove => 0,
                    crate::substitution::BoundCase::EllEqual => 1,
                    _ => 2,
                }] += 1;
                let bound = Float::with_val(cfg.precision, &b.value * &premise.scale);
                let mut row = ReportRow::new(n, x.clone(), d[ell].clone(), bound, b.case.to_string(), &tol);
                row.ell = Some(ell);
                report.rows.push(row);
            }
        }
    }
    report.notes.push(format!(
        "sigma = {sigma}; premise scale c = {}; rows per branch: ell-above {}, ell-equal {}, ell-below {}",
        crate::numeric::format_float(&Float::with_val(53, &premise.scale)),
        covered[0],
        covered[1],
        covered[2]
    ));
    let ok = report.finish_rows();
    report.verdict = Outcome::from_bool(ok);
    report.premise = Some(premise);
    Ok(report)
}

/// Fits `|f^(n)(x)| <= A C^n M_n (1 + ln(1/x) if k | n > 0)` for
/// `f(x) = g(x^k)`, computed by jet composition.
pub fn verify_lemma41(
    g: &NamedFunction,
    k: u32,
    m: &WeightSequence,
    orders: usize,
    grid: &Grid,
    premise: Option<&PremiseCertificate>,
    cfg: &HarnessConfig,
) -> Result<VerificationReport, HarnessError> {
    let premise = premise.ok_or_else(|| HarnessError::Premise("no certificate supplied".into()))?;
    let a = Rational::from(1 - Rational::from((1, k)));
    if premise.function != g.to_string() || premise.a != a {
        return Err(HarnessError::Premise(format!(
            "certificate is for {} with exponent {}, need {g} with exponent {a}",
            premise.function, premise.a
        )));
    }
    if premise.grid != *grid {
        return Err(HarnessError::Premise("premise and conclusion grids differ".into()));
    }
    if premise.orders < orders {
        return Err(HarnessError::Premise(format!(
            "certificate covers orders <= {}, need {orders}",
            premise.orders
        )));
    }
    let prec = cfg.precision;
    let mf: Vec<Float> = (0..=orders)
        .map(|n| Ok(m.value(n)?.to_float(prec)))
        .collect::<Result<_, HarnessError>>()?;
    let one = Float::with_val(prec, 1);
    let mut samples = Vec::new();
    for x in grid.positive() {
        let xf = cfg.float(x.clone());
        let inner = Jet::variable(xf.clone(), orders, cfg.budget)?.powi(k);
        let outer = g.jet(inner.value(), orders, cfg.budget)?;
        let f = Jet::compose(&outer, &inner)?;
        let d: Vec<Float> = f.derivatives().into_iter().map(|v| v.abs()).collect();
        samples.push((x.clone(), xf, d));
    }
    let mut e = vec![Float::new(prec); orders + 1];
    for (_, xf, d) in &samples {
        for n in 0..=orders {
            let unit = log_bound(&mf[n], k, n, xf, &one, &one)?;
            let r = super::ratio_of(&d[n], &unit.value);
            if r > e[n] {
                e[n] = r;
            }
        }
    }
    let fit = fit_normalized(e, "C");
    let mut report = VerificationReport::new("lemma41", &format!("{g}|k={k}"), grid, orders, cfg);
    let tol = cfg.tolerance();
    if fit.is_finite() {
        for n in 0..=orders {
            for (x, xf, d) in &samples {
                // A C^n times the unit-constant bound, so C = 0 needs no special case.
                let unit = log_bound(&mf[n], k, n, xf, &one, &one)?;
                let bound = Float::with_val(prec, fit.scale(n) * &unit.value);
                report.rows.push(ReportRow::new(n, x.clone(), d[n].clone(), bound, unit.case.to_string(), &tol));
            }
        }
    }
    let ok = report.finish_rows();
    let fit_ok = fit.is_finite() && fit.growth <= cfg.ceiling();
    report.notes.push(format!(
        "premise certified with scale c = {}",
        crate::numeric::format_float(&Float::with_val(53, &premise.scale))
    ));
    report.verdict = Outcome::from_bool(ok && fit_ok);
    report.fit = Some(fit);
    report.premise = Some(premise.clone());
    Ok(report)
}

/// `|g^(n)(0)| <= A B^n M_{kn} / ((kn)!)^(1-1/k)` with fitted `(A, B)`.
pub fn verify_zero_bound(
    pair: &SubstitutionPair,
    orders: usize,
    grid: &Grid,
    bounds: Option<&BoundSource>,
    cfg: &HarnessConfig,
) -> Result<VerificationReport, HarnessError> {
    let k = pair.k as usize;
    let prec = cfg.precision;
    let m = bounds_for(pair, bounds, orders * k + 1, grid, cfg)?;
    let zero = Rational::new();
    let d = abs_derivatives(&pair.g, &zero, orders, cfg)?;
    let expo = Float::with_val(prec, Rational::from((k as u32 - 1, k as u32)));
    let denom: Vec<Float> = (0..=orders)
        .map(|n| {
            let fact = Float::with_val(prec, factorial((k * n) as u32));
            let weight = Float::with_val(prec, fact.pow(&expo));
            Float::with_val(prec, &m[k * n] / weight)
        })
        .collect();
    let normalized: Vec<Float> = (0..=orders).map(|n| super::ratio_of(&d[n], &denom[n])).collect();
    let fit = fit_normalized(normalized, "B");
    let grid0 = Grid::from_points(vec![zero.clone()])?;
    let mut report = VerificationReport::new("zero-bound", &pair.id, &grid0, orders, cfg);
    let tol = cfg.tolerance();
    if fit.is_finite() {
        for n in 0..=orders {
            let bound = Float::with_val(prec, fit.scale(n) * &denom[n]);
            report.rows.push(ReportRow::new(n, zero.clone(), d[n].clone(), bound, "zero", &tol));
        }
    }
    let ok = report.finish_rows();
    let fit_ok = fit.is_finite() && fit.growth <= cfg.ceiling();
    report.verdict = Outcome::from_bool(ok && fit_ok);
    report.fit = Some(fit);
    Ok(report)
}
