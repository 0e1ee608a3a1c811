use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Integer, Rational};

use super::elementary::sinh_cosh;
use super::{lift_integer, Elementary, Jet, JetError, OrderBudget};
use crate::numeric::{factorial, format_rational, parse_rational, Scalar};

/// Registry of functions with jets available at any admissible point.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedFunction {
    Exp,
    Cosh,
    /// `cosh(sqrt(y)) = sum_n y^n / (2n)!`, entire in `y`.
    CoshSqrt,
    /// `e^(-1/x)` for `x > 0`.
    ExpNegInv,
    /// `exp(x^p)`.
    ExpPower(u32),
    /// `sum_m p_m x^m`, coefficients in increasing degree.
    Polynomial(Vec<Rational>),
    /// Quotient of two polynomials.
    RationalFn { num: Vec<Rational>, den: Vec<Rational> },
    /// `sum_{j=0}^J a_j e^(-j x)`.
    ExpDecayFourier(Vec<Rational>),
}

impl NamedFunction {
    pub const IDS: [&'static str; 8] = [
        "exp",
        "cosh",
        "cosh_sqrt",
        "exp_neg_inv",
        "exp_power",
        "polynomial",
        "rational",
        "exp_decay_fourier",
    ];

    pub fn id(&self) -> &'static str {
        match self {
            NamedFunction::Exp => "exp",
            NamedFunction::Cosh => "cosh",
            NamedFunction::CoshSqrt => "cosh_sqrt",
            NamedFunction::ExpNegInv => "exp_neg_inv",
            NamedFunction::ExpPower(_) => "exp_power",
            NamedFunction::Polynomial(_) => "polynomial",
            NamedFunction::RationalFn { .. } => "rational",
            NamedFunction::ExpDecayFourier(_) => "exp_decay_fourier",
        }
    }

    /// Parses `id` or `id:params`, where params are
    /// `p` for `exp_power`, a comma list of coefficients for `polynomial` and
    /// `exp_decay_fourier`, and `num|den` coefficient lists for `rational`.
    pub fn parse(descriptor: &str) -> Result<Self, JetError> {
        let (id, params) = match descriptor.split_once(':') {
            Some((id, p)) => (id.trim(), Some(p.trim())),
            None => (descriptor.trim(), None),
        };
        Self::from_parts(id, params)
    }

    pub fn from_parts(id: &str, params: Option<&str>) -> Result<Self, JetError> {
        let bad = |m: String| JetError::BadParameter(format!("{id}: {m}"));
        let need = || params.filter(|p| !p.is_empty()).ok_or_else(|| bad("parameters required".into()));
        let none = || match params {
            Some(p) if !p.is_empty() => Err(bad("takes no parameters".into())),
            _ => Ok(()),
        };
        let list = |text: &str| -> Result<Vec<Rational>, JetError> {
            let v = text
                .split(',')
                .map(|s| parse_rational(s).map_err(|e| bad(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(v)
        };
        match id {
            "exp" => none().map(|_| NamedFunction::Exp),
            "cosh" => none().map(|_| NamedFunction::Cosh),
            "cosh_sqrt" => none().map(|_| NamedFunction::CoshSqrt),
            "exp_neg_inv" => none().map(|_| NamedFunction::ExpNegInv),
            "exp_power" => {
                let p: u32 = need()?.parse().map_err(|_| bad("power must be a positive integer".into()))?;
                if p == 0 {
                    return Err(bad("power must be a positive integer".into()));
                }
                Ok(NamedFunction::ExpPower(p))
            }
            "polynomial" => Ok(NamedFunction::Polynomial(list(need()?)?)),
            "exp_decay_fourier" => Ok(NamedFunction::ExpDecayFourier(list(need()?)?)),
            "rational" => {
                let (n, d) = need()?.split_once('|').ok_or_else(|| bad("expected `num|den`".into()))?;
                let den = list(d)?;
                if den.iter().all(|c| c.cmp0() == Ordering::Equal) {
                    return Err(bad("denominator is identically zero".into()));
                }
                Ok(NamedFunction::RationalFn { num: list(n)?, den })
            }
            other => Err(JetError::BadParameter(format!(
                "unknown function `{other}` (known: {})",
                Self::IDS.join(", ")
            ))),
        }
    }

    /// Parameter string accepted by [`NamedFunction::from_parts`].
    pub fn params(&self) -> Option<String> {
        let join = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
        match self {
            NamedFunction::ExpPower(p) => Some(p.to_string()),
            NamedFunction::Polynomial(c) | NamedFunction::ExpDecayFourier(c) => Some(join(c)),
            NamedFunction::RationalFn { num, den } => Some(format!("{}|{}", join(num), join(den))),
            _ => None,
        }
    }

    /// Whether jets exist at `x = 0` (smooth up to the left endpoint).
    pub fn smooth_at_zero(&self) -> bool {
        match self {
            NamedFunction::ExpNegInv => false,
            NamedFunction::RationalFn { den, .. } => den.first().is_some_and(|c| c.cmp0() != Ordering::Equal),
            _ => true,
        }
    }

    pub fn value<T: Scalar>(&self, x0: &T) -> Result<T, JetError> {
        Ok(self.jet(x0, 0, OrderBudget::default())?.value().clone())
    }

    /// Jet of order `order` at `x0`.
    pub fn jet<T: Scalar>(&self, x0: &T, order: usize, budget: OrderBudget) -> Result<Jet<T>, JetError> {
        budget.check(order)?;
        let domain = |constraint: &str| JetError::Domain {
            function: self.id().into(),
            constraint: constraint.into(),
        };
        let unrepresentable = || JetError::NotRepresentable(format!("{}({x0})", self.id()));
        let coeffs = match self {
            NamedFunction::Exp => {
                let e = x0.exp().ok_or_else(unrepresentable)?;
                over_factorials(x0, (0..=order).map(|_| e.clone()))
            }
            NamedFunction::Cosh => {
                let (sh, ch) = sinh_cosh(x0).ok_or_else(unrepresentable)?;
                over_factorials(x0, (0..=order).map(|n| if n % 2 == 0 { ch.clone() } else { sh.clone() }))
            }
            NamedFunction::CoshSqrt => cosh_sqrt(x0, order).map_err(|e| match e {
                CoshSqrtError::Negative => domain("y >= 0"),
                CoshSqrtError::Inexact => unrepresentable(),
            })?,
            NamedFunction::ExpNegInv => {
                if x0.sign() != Ordering::Greater {
                    return Err(domain("x > 0"));
                }
                let u = x0.one().div(x0);
                let e = u.neg().exp().ok_or_else(unrepresentable)?;
                let mut p = vec![Integer::from(1)];
                let mut derivs = Vec::with_capacity(order + 1);
                for _ in 0..=order {
                    derivs.push(e.mul(&eval_integer_poly(&p, &u)));
                    p = next_exp_neg_inv(&p);
                }
                over_factorials(x0, derivs.into_iter())
            }
            NamedFunction::ExpPower(p) => {
                let x = Jet::variable(x0.clone(), order, budget)?;
                return x.powi(*p).apply(&Elementary::Exp).map_err(|e| match e {
                    JetError::NotRepresentable(_) => unrepresentable(),
                    other => other,
                });
            }
            NamedFunction::Polynomial(c) => taylor_shift(c, x0, order),
            NamedFunction::RationalFn { num, den } => {
                let d = Jet::from_parts(x0.clone(), taylor_shift(den, x0, order));
                if d.value().is_zero() {
                    return Err(domain("denominator nonzero"));
                }
                let n = Jet::from_parts(x0.clone(), taylor_shift(num, x0, order));
                return n.mul(&d.apply(&Elementary::Reciprocal)?);
            }
            NamedFunction::ExpDecayFourier(a) => {
                let mut derivs = vec![x0.zero(); order + 1];
                for (j, aj) in a.iter().enumerate() {
                    let rate = x0.lift_int(-(j as i64));
                    let e = rate.mul(x0).exp().ok_or_else(unrepresentable)?;
                    let mut term = x0.lift(aj).mul(&e);
                    for d in derivs.iter_mut() {
                        *d = d.add(&term);
                        term = term.mul(&rate);
                    }
                }
                over_factorials(x0, derivs.into_iter())
            }
        };
        Ok(Jet::from_parts(x0.clone(), coeffs))
    }
}

impl fmt::Display for NamedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.params() {
            Some(p) => write!(f, "{}:{p}", self.id()),
            None => f.write_str(self.id()),
        }
    }
}

fn over_factorials<T: Scalar>(like: &T, derivs: impl Iterator<Item = T>) -> Vec<T> {
    derivs
        .enumerate()
        .map(|(n, d)| d.div(&lift_integer(like, &factorial(n as u32))))
        .collect()
}

fn binomial(m: usize, n: usize) -> Integer {
    Integer::from(Integer::binomial_u(m as u32, n as u32))
}

/// Taylor coefficients at `x0` of `sum_m p_m x^m`.
fn taylor_shift<T: Scalar>(p: &[Rational], x0: &T, order: usize) -> Vec<T> {
    (0..=order)
        .map(|n| {
            (n..p.len()).fold(x0.zero(), |acc, m| {
                let c = x0.lift(&Rational::from(&p[m] * binomial(m, n)));
                acc.add(&c.mul(&x0.powi((m - n) as u32)))
            })
        })
        .collect()
}

fn eval_integer_poly<T: Scalar>(p: &[Integer], u: &T) -> T {
    p.iter().rev().fold(u.zero(), |acc, c| acc.mul(u).add(&lift_integer(u, c)))
}

/// `P_{n+1}(u) = u^2 (P_n(u) - P_n'(u))`, so that
/// `d^n/dx^n e^(-1/x) = e^(-u) P_n(u)` with `u = 1/x`.
fn next_exp_neg_inv(p: &[Integer]) -> Vec<Integer> {
    let mut out = vec![Integer::new(); p.len() + 2];
    for (i, c) in p.iter().enumerate() {
        out[i + 2] += c;
        if i > 0 {
            out[i + 1] -= Integer::from(c * i as u32);
        }
    }
    out
}

/// Integer coefficients of `P_n`, lowest degree first.
pub fn exp_neg_inv_polynomial(n: usize) -> Vec<Integer> {
    let mut p = vec![Integer::from(1)];
    for _ in 0..n {
        p = next_exp_neg_inv(&p);
    }
    while p.len() > 1 && p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    p
}

enum CoshSqrtError {
    Negative,
    Inexact,
}

/// `c_n = g^(n)(y0)/n! = sum_{m >= n} C(m, n) y0^(m-n) / (2m)!`.
///
/// Every term is positive for `y0 > 0`, so the sum is computed without
/// cancellation; composing `cosh` with `sqrt` instead loses roughly
/// `n * log2(1/y0)` bits at small `y0`.
fn cosh_sqrt<T: Scalar>(y0: &T, order: usize) -> Result<Vec<T>, CoshSqrtError> {
    match y0.sign() {
        Ordering::Less => return Err(CoshSqrtError::Negative),
        Ordering::Equal => {
            return Ok((0..=order)
                .map(|n| y0.one().div(&lift_integer(y0, &factorial(2 * n as u32))))
                .collect())
        }
        Ordering::Greater => {}
    }
    let bits = match y0.mode() {
        crate::numeric::NumericMode::Extended { bits } => bits,
        crate::numeric::NumericMode::ExactRational => return Err(CoshSqrtError::Inexact),
    };
    let wp = bits + 64;
    let y = y0.to_float(wp);
    let eps = Float::with_val(wp, 1) >> (wp + 8);
    let mut out = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut term = Float::with_val(wp, 1) / Float::with_val(wp, factorial(2 * n as u32));
        let mut sum = term.clone();
        let mut m = n;
        loop {
            // t_{m+1}/t_m = (m+1)/(m+1-n) * y / ((2m+1)(2m+2))
            let num = (m + 1) as u64;
            let den = ((m + 1 - n) as u64) * ((2 * m + 1) as u64) * ((2 * m + 2) as u64);
            let ratio = Float::with_val(wp, &y * num) / den;
            term *= &ratio;
            sum += &term;
            m += 1;
            if ratio < 0.5 && term <= Float::with_val(wp, &sum * &eps) {
                break;
            }
        }
        out.push(y0.lift_float(&sum).expect("extended mode"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn close(a: &Float, b: &Float, bits: u32) -> bool {
        let scale = Float::with_val(a.prec(), b.abs_ref()).max(&Float::with_val(a.prec(), 1));
        Float::with_val(a.prec(), a - b).abs() <= scale >> bits
    }

    #[test]
    fn exp_neg_inv_polynomials_by_hand() {
        let ints = |v: &[i64]| v.iter().map(|&c| Integer::from(c)).collect::<Vec<_>>();
        assert_eq!(exp_neg_inv_polynomial(1), ints(&[0, 0, 1]));
        assert_eq!(exp_neg_inv_polynomial(2), ints(&[0, 0, 0, -2, 1]));
        assert_eq!(exp_neg_inv_polynomial(3), ints(&[0, 0, 0, 0, 6, -6, 1]));
    }

    #[test]
    fn exp_neg_inv_at_one() {
        let j = NamedFunction::ExpNegInv.jet(&Float::with_val(256, 1), 2, OrderBudget::default()).unwrap();
        let e = Float::with_val(256, -1).exp();
        assert!(close(&j.coeffs()[0], &e, 250));
        assert!(close(&j.coeffs()[1], &e, 250));
        assert!(close(&j.coeffs()[2], &(Float::with_val(256, -&e) / 2u32), 250));
        assert!(matches!(
            NamedFunction::ExpNegInv.jet(&Float::with_val(256, 0), 2, OrderBudget::default()),
            Err(JetError::Domain { .. })
        ));
    }

    #[test]
    fn exp_neg_inv_matches_composition() {
        let x0 = Float::with_val(256, 0.3);
        let direct = NamedFunction::ExpNegInv.jet(&x0, 10, OrderBudget::default()).unwrap();
        let x = Jet::variable(x0, 10, OrderBudget::default()).unwrap();
        let composed = x.apply(&Elementary::Reciprocal).unwrap().neg().apply(&Elementary::Exp).unwrap();
        for (a, b) in direct.coeffs().iter().zip(composed.coeffs()) {
            assert!(close(a, b, 230));
        }
    }

    #[test]
    fn cosh_sqrt_at_zero_is_exact() {
        let j = NamedFunction::CoshSqrt.jet(&q(0, 1), 3, OrderBudget::default()).unwrap();
        assert_eq!(j.coeffs(), [q(1, 1), q(1, 2), q(1, 24), q(1, 720)]);
    }

    #[test]
    fn cosh_sqrt_series_matches_composition() {
        let y0 = Float::with_val(256, 0.25);
        let series = NamedFunction::CoshSqrt.jet(&y0, 12, OrderBudget::default()).unwrap();
        let y = Jet::variable(y0, 12, OrderBudget::default()).unwrap();
        let composed = y.apply(&Elementary::Pow(q(1, 2))).unwrap().apply(&Elementary::Cosh).unwrap();
        for (a, b) in series.coeffs().iter().zip(composed.coeffs()) {
            assert!(close(a, b, 200));
        }
    }

    #[test]
    fn cosh_at_zero() {
        let j = NamedFunction::Cosh.jet(&q(0, 1), 4, OrderBudget::default()).unwrap();
        assert_eq!(j.coeffs(), [q(1, 1), q(0, 1), q(1, 2), q(0, 1), q(1, 24)]);
    }

    #[test]
    fn polynomial_taylor_shift() {
        // x^4 at 1/2: derivatives 1/16, 1/2, 3, 12, 24.
        let p = NamedFunction::parse("polynomial:0,0,0,0,1").unwrap();
        let j = p.jet(&q(1, 2), 5, OrderBudget::default()).unwrap();
        assert_eq!(j.derivatives(), [q(1, 16), q(1, 2), q(3, 1), q(12, 1), q(24, 1), q(0, 1)]);
    }

    #[test]
    fn rational_function_series() {
        let r = NamedFunction::parse("rational:1|1,-1/2").unwrap();
        let j = r.jet(&q(0, 1), 3, OrderBudget::default()).unwrap();
        assert_eq!(j.coeffs(), [q(1, 1), q(1, 2), q(1, 4), q(1, 8)]);
        let pole = NamedFunction::parse("rational:1|2,-1").unwrap();
        assert!(matches!(pole.jet(&q(2, 1), 1, OrderBudget::default()), Err(JetError::Domain { .. })));
    }

    #[test]
    fn exp_decay_fourier_at_zero() {
        let h = NamedFunction::parse("exp_decay_fourier:1,1/2,1/4").unwrap();
        let j = h.jet(&q(0, 1), 2, OrderBudget::default()).unwrap();
        // h^(n)(0) = sum a_j (-j)^n
        assert_eq!(j.derivatives(), [q(7, 4), q(-1, 1), q(3, 2)]);
    }

    #[test]
    fn exp_power_at_zero() {
        let f = NamedFunction::parse("exp_power:3").unwrap();
        let j = f.jet(&q(0, 1), 6, OrderBudget::default()).unwrap();
        assert_eq!(j.coeffs(), [q(1, 1), q(0, 1), q(0, 1), q(1, 1), q(0, 1), q(0, 1), q(1, 2)]);
    }

    #[test]
    fn descriptors_round_trip() {
        for d in ["exp", "cosh_sqrt", "exp_power:3", "polynomial:1,0,-1/2", "rational:1|1,0,-1/2", "exp_decay_fourier:1,1/2"] {
            assert_eq!(NamedFunction::parse(d).unwrap().to_string(), d);
        }
        assert!(NamedFunction::parse("gamma").is_err());
        assert!(NamedFunction::parse("exp:3").is_err());
        assert!(NamedFunction::parse("rational:1|0").is_err());
    }
}
