//! Numeric kernel: exact rationals, extended-precision floats, decimal
//! (de)serialization, and the [`Scalar`] abstraction that jets run on.

use std::cmp::Ordering;
use std::fmt;

use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};
use serde::Serialize;
use thiserror::Error;

/// Default mantissa width for extended-precision arithmetic.
pub const DEFAULT_PRECISION: u32 = 256;
/// Smallest mantissa width a run may request.
pub const MIN_PRECISION: u32 = 64;
/// Default one-sided tolerance exponent for bound checks (relative `2^-100`).
pub const DEFAULT_TOLERANCE_EXP: u32 = 100;
/// Guard bits kept between working precision and the comparison tolerance
/// used by sequence predicates (256 bits of mantissa give `2^-200`).
pub const SEQUENCE_GUARD_BITS: u32 = 56;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMode {
    ExactRational,
    Extended { bits: u32 },
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::ExactRational => f.write_str("exact"),
            NumericMode::Extended { bits } => write!(f, "float{bits}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseNumberError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `"3"`, `"-1.25"`, `"2.5e-3"` or `"7/12"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ParseNumberError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseNumberError::Empty);
    }
    let malformed = || ParseNumberError::Malformed(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num.trim().parse().map_err(|_| malformed())?;
        let den: Integer = den.trim().parse().map_err(|_| malformed())?;
        if den == 0 {
            return Err(ParseNumberError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::from((num, den)));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| malformed())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = Rational::from(joined.parse::<Integer>().map_err(|_| malformed())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = Rational::from(10);
    if scale >= 0 {
        value *= ten.pow(scale as u32);
    } else {
        value /= ten.pow((-scale) as u32);
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Decimal rendering with as many significant digits as the mantissa holds.
/// Trailing zeros of the mantissa are dropped so output stays byte-stable.
pub fn format_float(value: &Float) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if value.is_zero() {
        return "0".into();
    }
    let digits = (f64::from(value.prec()) * std::f64::consts::LOG10_2).ceil() as usize;
    let raw = value.to_string_radix(10, Some(digits));
    let (mantissa, exponent) = match raw.find('e') {
        Some(pos) => (&raw[..pos], &raw[pos..]),
        None => (raw.as_str(), ""),
    };
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    match exponent {
        "" | "e0" => mantissa.to_string(),
        _ => format!("{mantissa}{exponent}"),
    }
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// `2^-exp` at the given precision.
pub fn tolerance(prec: u32, exp: u32) -> Float {
    Float::with_val(prec, 1) >> exp
}

/// One-sided check `actual <= bound * (1 + tol)`; never turns a real
/// violation of size above `tol` into a pass.
pub fn within_bound(actual: &Float, bound: &Float, tol: &Float) -> bool {
    let prec = actual.prec().max(bound.prec());
    let slack = Float::with_val(prec, 1 + tol);
    let limit = Float::with_val(prec, bound * &slack);
    *actual <= limit
}

/// A real that is either known exactly or carried at extended precision.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Approx(Float),
}

impl Number {
    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            Number::Exact(r) => Float::with_val(prec, r),
            Number::Approx(f) => Float::with_val(prec, f),
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Approx(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn sign(&self) -> Ordering {
        match self {
            Number::Exact(r) => r.cmp0(),
            Number::Approx(f) => f.cmp0().unwrap_or(Ordering::Equal),
        }
    }

    pub fn add(&self, rhs: &Number, prec: u32) -> Number {
        match (self, rhs) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(Rational::from(a + b)),
            _ => Number::Approx(Float::with_val(prec, self.to_float(prec) + rhs.to_float(prec))),
        }
    }

    pub fn mul(&self, rhs: &Number, prec: u32) -> Number {
        match (self, rhs) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(Rational::from(a * b)),
            _ => Number::Approx(Float::with_val(prec, self.to_float(prec) * rhs.to_float(prec))),
        }
    }

    /// Total order, exact when both sides are exact.
    pub fn compare(&self, rhs: &Number) -> Ordering {
        match (self, rhs) {
            (Number::Exact(a), Number::Exact(b)) => a.cmp(b),
            _ => {
                let prec = self.precision_hint().max(rhs.precision_hint());
                self.to_float(prec)
                    .partial_cmp(&rhs.to_float(prec))
                    .unwrap_or(Ordering::Equal)
            }
        }
    }

    fn precision_hint(&self) -> u32 {
        match self {
            Number::Exact(_) => DEFAULT_PRECISION,
            Number::Approx(f) => f.prec(),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => f.write_str(&format_rational(r)),
            Number::Approx(x) => f.write_str(&format_float(x)),
        }
    }
}

/// Exact `n`-th root of a nonnegative rational, if it exists.
pub fn exact_root(value: &Rational, n: u32) -> Option<Rational> {
    if value.cmp0() == Ordering::Less {
        return None;
    }
    if n == 1 {
        return Some(value.clone());
    }
    let root_of = |x: &Integer| {
        let r = Integer::from(x.root_ref(n));
        (r.clone().pow(n) == *x).then_some(r)
    };
    let num = root_of(value.numer())?;
    let den = root_of(value.denom())?;
    Some(Rational::from((num, den)))
}

/// Coefficient field for jets: exact rationals or extended-precision floats.
///
/// Transcendental operations return `None` when the result is not
/// representable in the value's mode (e.g. `exp(1)` as a rational).
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + PartialOrd + Send + Sync + 'static {
    fn mode(&self) -> NumericMode;
    /// Embeds a rational in the same mode (and precision) as `self`.
    fn lift(&self, value: &Rational) -> Self;
    fn lift_int(&self, value: i64) -> Self {
        self.lift(&Rational::from(value))
    }
    fn zero(&self) -> Self {
        self.lift_int(0)
    }
    fn one(&self) -> Self {
        self.lift_int(1)
    }
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Division; the divisor must be nonzero.
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn sign(&self) -> Ordering;
    fn abs(&self) -> Self;
    fn exp(&self) -> Option<Self>;
    fn ln(&self) -> Option<Self>;
    fn sin_cos(&self) -> Option<(Self, Self)>;
    fn pow_ratio(&self, exponent: &Rational) -> Option<Self>;
    fn to_float(&self, prec: u32) -> Float;
    fn to_number(&self) -> Number;
    /// Rounds a float into this mode; `None` in exact mode.
    fn lift_float(&self, value: &Float) -> Option<Self>;

    fn powi(&self, exponent: u32) -> Self {
        let mut acc = self.one();
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl Scalar for Rational {
    fn mode(&self) -> NumericMode {
        NumericMode::ExactRational
    }
    fn lift(&self, value: &Rational) -> Self {
        value.clone()
    }
    fn add(&self, rhs: &Self) -> Self {
        Rational::from(self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Rational::from(self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Rational::from(self / rhs)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn sign(&self) -> Ordering {
        self.cmp0()
    }
    fn abs(&self) -> Self {
        Rational::from(self.abs_ref())
    }
    fn exp(&self) -> Option<Self> {
        self.is_zero().then(|| Rational::from(1))
    }
    fn ln(&self) -> Option<Self> {
        (*self == 1).then(Rational::new)
    }
    fn sin_cos(&self) -> Option<(Self, Self)> {
        self.is_zero().then(|| (Rational::new(), Rational::from(1)))
    }
    fn pow_ratio(&self, exponent: &Rational) -> Option<Self> {
        let den = exponent.denom().to_u32()?;
        let num = exponent.numer().to_i32()?;
        if self.is_zero() {
            return match num.cmp(&0) {
                Ordering::Greater => Some(Rational::new()),
                Ordering::Equal => Some(Rational::from(1)),
                Ordering::Less => None,
            };
        }
        if den == 1 {
            return Some(self.clone().pow(num));
        }
        let root = exact_root(self, den)?;
        Some(root.pow(num))
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }
    fn lift_float(&self, _value: &Float) -> Option<Self> {
        None
    }
}

impl Scalar for Float {
    fn mode(&self) -> NumericMode {
        NumericMode::Extended { bits: self.prec() }
    }
    fn lift(&self, value: &Rational) -> Self {
        Float::with_val(self.prec(), value)
    }
    fn add(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self + rhs)
    }
    fn sub(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self - rhs)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self * rhs)
    }
    fn div(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self / rhs)
    }
    fn neg(&self) -> Self {
        Float::with_val(self.prec(), -self)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn sign(&self) -> Ordering {
        self.cmp0().unwrap_or(Ordering::Equal)
    }
    fn abs(&self) -> Self {
        Float::with_val(self.prec(), self.abs_ref())
    }
    fn exp(&self) -> Option<Self> {
        let v = Float::with_val(self.prec(), self.exp_ref());
        v.is_finite().then_some(v)
    }
    fn ln(&self) -> Option<Self> {
        (self.cmp0() == Some(Ordering::Greater)).then(|| Float::with_val(self.prec(), self.ln_ref()))
    }
    fn sin_cos(&self) -> Option<(Self, Self)> {
        let mut s = Float::new(self.prec());
        let mut c = Float::new(self.prec());
        (&mut s, &mut c).assign(self.sin_cos_ref());
        Some((s, c))
    }
    fn pow_ratio(&self, exponent: &Rational) -> Option<Self> {
        let prec = self.prec();
        if *exponent.denom() == 1 {
            let e = exponent.numer().to_i32()?;
            if self.is_zero() && e < 0 {
                return None;
            }
            return Some(Float::with_val(prec, self.pow(e)));
        }
        match self.cmp0()? {
            Ordering::Less => None,
            Ordering::Equal => (exponent.cmp0() == Ordering::Greater).then(|| Float::new(prec)),
            Ordering::Greater => {
                let e = Float::with_val(prec, exponent);
                Some(Float::with_val(prec, self.pow(&e)))
            }
        }
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn to_number(&self) -> Number {
        Number::Approx(self.clone())
    }
    fn lift_float(&self, value: &Float) -> Option<Self> {
        Some(Float::with_val(self.prec(), value))
    }
}
