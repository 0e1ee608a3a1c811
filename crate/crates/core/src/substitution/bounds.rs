use std::cmp::Ordering;
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use super::SubstitutionError;
use crate::numeric::factorial;
use crate::sequence::{check_factorial_monotone, WeightSequence};

/// Which branch of a multi-case bound produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundCase {
    /// `2^n M_n x^(-(1-1/k)n)`.
    PowerSub,
    /// `ell > sigma n`: factor `x^(-(ell - sigma n)) / (ell - sigma n)`.
    EllAbove,
    /// `ell = sigma n`: factor `1 + ln(1/x)`.
    EllEqual,
    /// `ell < sigma n`: factor `1 / (sigma n - ell)`.
    EllBelow,
    /// `k` does not divide `n`, or `n = 0`.
    NoLog,
    /// `k | n`, `n > 0`: factor `1 + ln(1/x)`.
    LogFactor,
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundCase::PowerSub => "power-sub",
            BoundCase::EllAbove => "ell-above",
            BoundCase::EllEqual => "ell-equal",
            BoundCase::EllBelow => "ell-below",
            BoundCase::NoLog => "no-log",
            BoundCase::LogFactor => "log-factor",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub value: Float,
    pub case: BoundCase,
}

fn domain(msg: impl Into<String>) -> SubstitutionError {
    SubstitutionError::Domain(msg.into())
}

fn check_unit(x: &Float) -> Result<(), SubstitutionError> {
    if x.cmp0() != Some(Ordering::Greater) || *x > 1 {
        return Err(domain(format!("x must lie in (0, 1], got {}", crate::numeric::format_float(x))));
    }
    Ok(())
}

fn m_value(m: &WeightSequence, n: usize, prec: u32) -> Result<Float, SubstitutionError> {
    Ok(m.value(n)?.to_float(prec))
}

/// `x^(-e)` for rational `e`.
fn inv_power(x: &Float, e: &Rational) -> Float {
    let prec = x.prec();
    let exponent = -Float::with_val(prec, e);
    Float::with_val(prec, x.pow(&exponent))
}

/// `1 + ln(1/x)`.
fn log_factor(x: &Float) -> Float {
    let prec = x.prec();
    Float::with_val(prec, 1 - Float::with_val(prec, x.ln_ref()))
}

/// `2^n M_n x^(-(1-1/k) n)` given `M_n`; precision follows `x`.
pub fn power_sub_bound(m_n: &Float, k: u32, n: usize, x: &Float) -> Result<Float, SubstitutionError> {
    if k < 2 {
        return Err(SubstitutionError::BadPower(k));
    }
    let prec = x.prec();
    if n == 0 {
        return Ok(Float::with_val(prec, m_n));
    }
    check_unit(x)?;
    let e = Rational::from(((k as u64 - 1) * n as u64, k as u64));
    let two_n = Float::with_val(prec, Float::u_exp(1, n as i32));
    Ok(Float::with_val(prec, m_n * two_n) * inv_power(x, &e))
}

pub fn lemma_power_sub_bound(m: &WeightSequence, k: u32, n: usize, x: &Float) -> Result<Float, SubstitutionError> {
    power_sub_bound(&m_value(m, n, x.prec())?, k, n, x)
}

/// Three-case bound `2^n (ell!/n!) M_n * factor(ell - sigma n, x)` given `M_n`.
pub fn add_smooth_bound(
    m_n: &Float,
    sigma: &Rational,
    n: usize,
    ell: usize,
    x: &Float,
) -> Result<BoundValue, SubstitutionError> {
    if sigma.cmp0() != Ordering::Greater || *sigma >= 1 {
        return Err(domain("sigma must lie in (0, 1)"));
    }
    if ell > n {
        return Err(domain(format!("ell = {ell} exceeds n = {n}")));
    }
    check_unit(x)?;
    let prec = x.prec();
    let gap = Rational::from(ell) - Rational::from(sigma * Rational::from(n));
    let (factor, case) = match gap.cmp0() {
        Ordering::Greater => {
            let f = inv_power(x, &gap) / Float::with_val(prec, &gap);
            (f, BoundCase::EllAbove)
        }
        Ordering::Equal => (log_factor(x), BoundCase::EllEqual),
        Ordering::Less => (Float::with_val(prec, Rational::from(-&gap).recip()), BoundCase::EllBelow),
    };
    let coeff = Rational::from(factorial(ell as u32)) / Rational::from(factorial(n as u32)) * Rational::from(Rational::from(2).pow(n as u32));
    let value = Float::with_val(prec, m_n * Float::with_val(prec, &coeff)) * factor;
    Ok(BoundValue { value, case })
}

/// As [`add_smooth_bound`], after checking the hypothesis that `M_n/n!` is
/// nondecreasing on `0..=n`.
pub fn lemma_add_smooth_bound(
    m: &WeightSequence,
    sigma: &Rational,
    n: usize,
    ell: usize,
    x: &Float,
) -> Result<BoundValue, SubstitutionError> {
    if !check_factorial_monotone(m, n)? {
        return Err(SubstitutionError::Hypothesis(format!("M_n/n! is not nondecreasing on 0..={n}")));
    }
    add_smooth_bound(&m_value(m, n, x.prec())?, sigma, n, ell, x)
}

/// `A C^n M_n`, times `1 + ln(1/x)` when `k | n` and `n > 0`.
pub fn log_bound(m_n: &Float, k: u32, n: usize, x: &Float, a: &Float, c: &Float) -> Result<BoundValue, SubstitutionError> {
    if k < 2 {
        return Err(SubstitutionError::BadPower(k));
    }
    if a.cmp0() != Some(Ordering::Greater) || c.cmp0() != Some(Ordering::Greater) {
        return Err(domain("A and C must be > 0"));
    }
    let prec = x.prec();
    let base = Float::with_val(prec, a * Float::with_val(prec, c.pow(n as u32))) * m_n;
    if n == 0 || n % k as usize != 0 {
        return Ok(BoundValue {
            value: base,
            case: BoundCase::NoLog,
        });
    }
    check_unit(x)?;
    Ok(BoundValue {
        value: base * log_factor(x),
        case: BoundCase::LogFactor,
    })
}

pub fn lemma_log_bound(
    m: &WeightSequence,
    k: u32,
    n: usize,
    x: &Float,
    a: &Float,
    c: &Float,
) -> Result<BoundValue, SubstitutionError> {
    log_bound(&m_value(m, n, x.prec())?, k, n, x, a, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Family;

    const P: u32 = 256;

    fn f(v: f64) -> Float {
        Float::with_val(P, v)
    }

    fn close(a: &Float, b: f64) -> bool {
        let b = f(b);
        Float::with_val(P, a - &b).abs() <= Float::with_val(P, b.abs_ref()) >> 240u32
    }

    fn fact() -> WeightSequence {
        WeightSequence::family(Family::gevrey(1))
    }

    #[test]
    fn power_sub_examples() {
        let ones = WeightSequence::family(Family::constant(1));
        assert!(close(&lemma_power_sub_bound(&ones, 2, 0, &f(0.3)).unwrap(), 1.0));
        assert!(close(&lemma_power_sub_bound(&ones, 2, 2, &f(0.25)).unwrap(), 16.0));
        assert!(close(&lemma_power_sub_bound(&fact(), 3, 3, &f(0.125)).unwrap(), 3072.0));
        assert!(lemma_power_sub_bound(&ones, 2, 1, &f(0.0)).is_err());
        assert!(close(&lemma_power_sub_bound(&ones, 2, 0, &f(0.0)).unwrap(), 1.0));
    }

    #[test]
    fn add_smooth_branches() {
        let half = Rational::from((1, 2));
        let above = lemma_add_smooth_bound(&fact(), &half, 4, 3, &f(0.25)).unwrap();
        assert_eq!(above.case, BoundCase::EllAbove);
        assert!(close(&above.value, 384.0));
        let e_inv = Float::with_val(P, -1).exp();
        let equal = lemma_add_smooth_bound(&fact(), &half, 4, 2, &e_inv).unwrap();
        assert_eq!(equal.case, BoundCase::EllEqual);
        assert!(close(&equal.value, 64.0));
        let b1 = lemma_add_smooth_bound(&fact(), &half, 4, 1, &f(0.5)).unwrap();
        let b2 = lemma_add_smooth_bound(&fact(), &half, 4, 1, &f(0.01)).unwrap();
        assert_eq!(b1.case, BoundCase::EllBelow);
        assert_eq!(b1.value, b2.value);
        // 2^4 * (1/24) * 24 / (2 - 1)
        assert!(close(&b1.value, 16.0));
    }

    #[test]
    fn add_smooth_needs_monotone_ratio() {
        let ones = WeightSequence::family(Family::constant(1));
        let half = Rational::from((1, 2));
        assert!(matches!(
            lemma_add_smooth_bound(&ones, &half, 4, 1, &f(0.5)),
            Err(SubstitutionError::Hypothesis(_))
        ));
    }

    #[test]
    fn log_bound_branches() {
        let e_inv = Float::with_val(P, -1).exp();
        let b = lemma_log_bound(&fact(), 2, 4, &e_inv, &f(1.0), &f(2.0)).unwrap();
        assert_eq!(b.case, BoundCase::LogFactor);
        assert!(close(&b.value, 768.0));
        let odd = lemma_log_bound(&fact(), 2, 3, &f(0.5), &f(1.0), &f(2.0)).unwrap();
        assert_eq!(odd.case, BoundCase::NoLog);
        assert!(close(&odd.value, 48.0));
        let zero = lemma_log_bound(&fact(), 2, 0, &f(0.0), &f(3.0), &f(2.0)).unwrap();
        assert!(close(&zero.value, 3.0));
        assert!(lemma_log_bound(&fact(), 2, 4, &f(0.0), &f(1.0), &f(2.0)).is_err());
    }

    #[test]
    fn power_sub_bound_decreases_in_x() {
        let m = f(1.0);
        let mut prev: Option<Float> = None;
        for j in 0..10 {
            let x = f(1.0) >> j;
            let b = power_sub_bound(&m, 3, 5, &x).unwrap();
            if let Some(p) = prev {
                assert!(b >= p);
            }
            prev = Some(b);
        }
    }
}
