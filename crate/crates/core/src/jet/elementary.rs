use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Rational};

use super::{Jet, JetError};
use crate::numeric::{NumericMode, Scalar};

/// Elementary functions with coefficient recurrences.
#[derive(Debug, Clone, PartialEq)]
pub enum Elementary {
    Exp,
    Ln,
    Sin,
    Cos,
    Cosh,
    Sinh,
    Reciprocal,
    /// `t^p` for rational `p`.
    Pow(Rational),
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elementary::Exp => f.write_str("exp"),
            Elementary::Ln => f.write_str("log"),
            Elementary::Sin => f.write_str("sin"),
            Elementary::Cos => f.write_str("cos"),
            Elementary::Cosh => f.write_str("cosh"),
            Elementary::Sinh => f.write_str("sinh"),
            Elementary::Reciprocal => f.write_str("reciprocal"),
            Elementary::Pow(p) => write!(f, "pow({p})"),
        }
    }
}

pub(super) fn apply<T: Scalar>(f: &Elementary, a: &Jet<T>) -> Result<Jet<T>, JetError> {
    let a0 = a.value();
    let unrepresentable = || JetError::NotRepresentable(format!("{f}({a0})"));
    let domain = |constraint: &str| JetError::Domain {
        function: f.to_string(),
        constraint: constraint.into(),
    };
    let coeffs = match f {
        Elementary::Exp => exp_series(a, a0.exp().ok_or_else(unrepresentable)?),
        Elementary::Ln => {
            if a0.sign() != Ordering::Greater {
                return Err(domain("argument constant term must be > 0"));
            }
            ln_series(a, a0.ln().ok_or_else(unrepresentable)?)
        }
        Elementary::Sin | Elementary::Cos => {
            let (s0, c0) = a0.sin_cos().ok_or_else(unrepresentable)?;
            let (s, c) = coupled(a, s0, c0, true);
            if *f == Elementary::Sin { s } else { c }
        }
        Elementary::Cosh | Elementary::Sinh => {
            let (sh0, ch0) = sinh_cosh(a0).ok_or_else(unrepresentable)?;
            let (sh, ch) = coupled(a, sh0, ch0, false);
            if *f == Elementary::Sinh { sh } else { ch }
        }
        Elementary::Reciprocal => {
            if a0.is_zero() {
                return Err(domain("argument constant term must be nonzero"));
            }
            reciprocal_series(a)
        }
        Elementary::Pow(p) => return pow(a, p, &domain, &unrepresentable),
    };
    Ok(Jet::from_parts(a.base_point().clone(), coeffs))
}

fn div_int<T: Scalar>(x: &T, n: usize) -> T {
    x.div(&x.lift_int(n as i64))
}

/// `b' = a' b`: `b_n = (1/n) sum_{k=1}^n k a_k b_{n-k}`.
fn exp_series<T: Scalar>(a: &Jet<T>, b0: T) -> Vec<T> {
    let c = a.coeffs();
    let mut b = vec![b0];
    for n in 1..c.len() {
        let mut s = c[0].zero();
        for k in 1..=n {
            s = s.add(&c[k].mul(&b[n - k]).mul(&c[0].lift_int(k as i64)));
        }
        b.push(div_int(&s, n));
    }
    b
}

/// `a b' = a'`: `b_n = (a_n - (1/n) sum_{k=1}^{n-1} k b_k a_{n-k}) / a_0`.
fn ln_series<T: Scalar>(a: &Jet<T>, b0: T) -> Vec<T> {
    let c = a.coeffs();
    let mut b = vec![b0];
    for n in 1..c.len() {
        let mut s = c[0].zero();
        for k in 1..n {
            s = s.add(&b[k].mul(&c[n - k]).mul(&c[0].lift_int(k as i64)));
        }
        b.push(c[n].sub(&div_int(&s, n)).div(&c[0]));
    }
    b
}

/// `s' = a' c`, `c' = -a' s` (trig) or `c' = a' s` (hyperbolic).
fn coupled<T: Scalar>(a: &Jet<T>, s0: T, c0: T, trig: bool) -> (Vec<T>, Vec<T>) {
    let c = a.coeffs();
    let mut s = vec![s0];
    let mut co = vec![c0];
    for n in 1..c.len() {
        let mut ds = c[0].zero();
        let mut dc = c[0].zero();
        for k in 1..=n {
            let ka = c[k].mul(&c[0].lift_int(k as i64));
            ds = ds.add(&ka.mul(&co[n - k]));
            dc = dc.add(&ka.mul(&s[n - k]));
        }
        s.push(div_int(&ds, n));
        let dc = div_int(&dc, n);
        co.push(if trig { dc.neg() } else { dc });
    }
    (s, co)
}

/// Correctly rounded in float mode; exact only at 0.
pub(super) fn sinh_cosh<T: Scalar>(x: &T) -> Option<(T, T)> {
    if x.is_zero() {
        return Some((x.zero(), x.one()));
    }
    let NumericMode::Extended { bits } = x.mode() else {
        return None;
    };
    let xf = x.to_float(bits);
    let sh = Float::with_val(bits, xf.sinh_ref());
    let ch = Float::with_val(bits, xf.cosh_ref());
    Some((x.lift_float(&sh)?, x.lift_float(&ch)?))
}

/// `a b' = a' b` with `b_0 = 1 / a_0`: `b_n = -(1/a_0) sum_{k=1}^n a_k b_{n-k}`.
fn reciprocal_series<T: Scalar>(a: &Jet<T>) -> Vec<T> {
    let c = a.coeffs();
    let mut b = vec![c[0].one().div(&c[0])];
    for n in 1..c.len() {
        let mut s = c[0].zero();
        for k in 1..=n {
            s = s.add(&c[k].mul(&b[n - k]));
        }
        b.push(s.neg().div(&c[0]));
    }
    b
}

fn pow<T: Scalar>(
    a: &Jet<T>,
    p: &Rational,
    domain: &dyn Fn(&str) -> JetError,
    unrepresentable: &dyn Fn() -> JetError,
) -> Result<Jet<T>, JetError> {
    let c = a.coeffs();
    let integer = *p.denom() == 1;
    if c[0].is_zero() {
        // Not analytic at 0 unless p is a nonnegative integer.
        return match p.numer().to_u32() {
            Some(e) if integer => Ok(a.powi(e)),
            _ => Err(domain("constant term 0 needs a nonnegative integer exponent")),
        };
    }
    if !integer && c[0].sign() == Ordering::Less {
        return Err(domain("fractional exponent needs a positive constant term"));
    }
    let b0 = c[0].pow_ratio(p).ok_or_else(unrepresentable)?;
    // a b' = p a' b: b_n = (1/(n a_0)) sum_{k=1}^n ((p+1)k - n) a_k b_{n-k}.
    let p1 = c[0].lift(&Rational::from(p + 1u32));
    let mut b = vec![b0];
    for n in 1..c.len() {
        let mut s = c[0].zero();
        for k in 1..=n {
            let w = p1.mul(&c[0].lift_int(k as i64)).sub(&c[0].lift_int(n as i64));
            s = s.add(&w.mul(&c[k]).mul(&b[n - k]));
        }
        b.push(div_int(&s, n).div(&c[0]));
    }
    Ok(Jet::from_parts(a.base_point().clone(), b))
}
