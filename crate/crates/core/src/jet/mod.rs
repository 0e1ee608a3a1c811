//! Truncated Taylor series ("jets") over exact rationals or extended-precision
//! floats. A jet of order `N` at `x0` stores `c_j = h^(j)(x0) / j!` for
//! `0 <= j <= N`; every operation truncates at `N` explicitly.

mod elementary;
mod named;

use std::cmp::Ordering;

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::numeric::{factorial, NumericMode, Scalar};

pub use elementary::Elementary;
pub use named::{exp_neg_inv_polynomial, NamedFunction};

/// Default cap on jet order; larger orders need an explicit [`OrderBudget`].
pub const DEFAULT_MAX_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("base points differ: {left} vs {right}")]
    BasePointMismatch { left: String, right: String },
    #[error("orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("numeric modes differ: {left} vs {right}")]
    ModeMismatch { left: NumericMode, right: NumericMode },
    #[error("domain violation in {function}: {constraint}")]
    Domain { function: String, constraint: String },
    #[error("{0} is not representable as an exact rational; use extended precision")]
    NotRepresentable(String),
    #[error("order {order} exceeds the budget of {max}; raise the order budget explicitly")]
    OrderBudget { order: usize, max: usize },
    #[error("jet of order {have} cannot supply derivative {need}")]
    OrderTooSmall { have: usize, need: usize },
    #[error("{0}")]
    BadParameter(String),
}

/// Upper limit on jet orders accepted by constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderBudget {
    max: usize,
}

impl Default for OrderBudget {
    fn default() -> Self {
        OrderBudget {
            max: DEFAULT_MAX_ORDER,
        }
    }
}

impl OrderBudget {
    /// Explicit override of the default cap.
    pub fn new(max: usize) -> Self {
        OrderBudget { max }
    }

    pub fn max(&self) -> usize {
        self.max
    }

    pub fn check(&self, order: usize) -> Result<(), JetError> {
        if order > self.max {
            return Err(JetError::OrderBudget { order, max: self.max });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T: Scalar> {
    base_point: T,
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    /// Jet with the given Taylor coefficients `c_0..c_N`.
    pub fn new(base_point: T, coeffs: Vec<T>, budget: OrderBudget) -> Result<Self, JetError> {
        if coeffs.is_empty() {
            return Err(JetError::BadParameter("a jet needs at least one coefficient".into()));
        }
        budget.check(coeffs.len() - 1)?;
        if let Some(c) = coeffs.iter().find(|c| c.mode() != base_point.mode()) {
            return Err(JetError::ModeMismatch {
                left: base_point.mode(),
                right: c.mode(),
            });
        }
        Ok(Jet { base_point, coeffs })
    }

    /// The identity function `x` at `x0`.
    pub fn variable(x0: T, order: usize, budget: OrderBudget) -> Result<Self, JetError> {
        let mut coeffs = vec![x0.zero(); order + 1];
        coeffs[0] = x0.clone();
        if order >= 1 {
            coeffs[1] = x0.one();
        }
        Self::new(x0, coeffs, budget)
    }

    pub fn constant(x0: T, value: T, order: usize, budget: OrderBudget) -> Result<Self, JetError> {
        let mut coeffs = vec![x0.zero(); order + 1];
        coeffs[0] = value;
        Self::new(x0, coeffs, budget)
    }

    pub(crate) fn from_parts(base_point: T, coeffs: Vec<T>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Jet { base_point, coeffs }
    }

    pub fn base_point(&self) -> &T {
        &self.base_point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mode(&self) -> NumericMode {
        self.base_point.mode()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Option<&T> {
        self.coeffs.get(j)
    }

    pub fn value(&self) -> &T {
        &self.coeffs[0]
    }

    /// `h^(j)(x0) = c_j * j!`.
    pub fn derivative(&self, j: usize) -> Result<T, JetError> {
        let c = self.coeffs.get(j).ok_or(JetError::OrderTooSmall {
            have: self.order(),
            need: j,
        })?;
        Ok(c.mul(&lift_integer(c, &factorial(j as u32))))
    }

    pub fn derivatives(&self) -> Vec<T> {
        (0..=self.order()).map(|j| self.derivative(j).expect("within order")).collect()
    }

    /// Keeps `c_0..c_order`.
    pub fn truncate(&self, order: usize) -> Result<Self, JetError> {
        if order > self.order() {
            return Err(JetError::OrderTooSmall {
                have: self.order(),
                need: order,
            });
        }
        Ok(Jet::from_parts(self.base_point.clone(), self.coeffs[..=order].to_vec()))
    }

    fn check_compatible(&self, other: &Self) -> Result<(), JetError> {
        if self.mode() != other.mode() {
            return Err(JetError::ModeMismatch {
                left: self.mode(),
                right: other.mode(),
            });
        }
        if self.order() != other.order() {
            return Err(JetError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        if !points_agree(&self.base_point, &other.base_point) {
            return Err(JetError::BasePointMismatch {
                left: self.base_point.to_string(),
                right: other.base_point.to_string(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&T, &T) -> T) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| op(a, b)).collect();
        Ok(Jet::from_parts(self.base_point.clone(), coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.zip_with(other, T::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.zip_with(other, T::sub)
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order();
        let coeffs = (0..=n)
            .map(|m| {
                (0..=m).fold(self.base_point.zero(), |acc, i| acc.add(&self.coeffs[i].mul(&other.coeffs[m - i])))
            })
            .collect();
        Jet::from_parts(self.base_point.clone(), coeffs)
    }

    pub fn scale(&self, c: &T) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        Jet::from_parts(self.base_point.clone(), coeffs)
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(T::neg).collect();
        Jet::from_parts(self.base_point.clone(), coeffs)
    }

    /// Adds a constant to `c_0`.
    pub fn shift(&self, c: &T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].add(c);
        out
    }

    /// `self^e` by repeated squaring; valid for any constant term.
    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Jet::from_parts(self.base_point.clone(), {
            let mut c = vec![self.base_point.zero(); self.coeffs.len()];
            c[0] = self.base_point.one();
            c
        });
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    /// Jet of `outer ∘ inner` at `inner`'s base point.
    ///
    /// Horner evaluation of the outer series in `inner - inner(x0)`; the
    /// shifted inner series has zero constant term, so truncation is exact.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self, JetError> {
        if outer.mode() != inner.mode() {
            return Err(JetError::ModeMismatch {
                left: outer.mode(),
                right: inner.mode(),
            });
        }
        if outer.order() != inner.order() {
            return Err(JetError::OrderMismatch {
                left: outer.order(),
                right: inner.order(),
            });
        }
        if !points_agree(&outer.base_point, inner.value()) {
            return Err(JetError::BasePointMismatch {
                left: outer.base_point.to_string(),
                right: inner.value().to_string(),
            });
        }
        let x0 = inner.base_point.clone();
        let mut t = inner.clone();
        t.coeffs[0] = x0.zero();
        let n = outer.order();
        let mut acc = Jet::from_parts(x0.clone(), {
            let mut c = vec![x0.zero(); n + 1];
            c[0] = outer.coeffs[n].clone();
            c
        });
        for j in (0..n).rev() {
            acc = acc.mul_unchecked(&t);
            acc.coeffs[0] = acc.coeffs[0].add(&outer.coeffs[j]);
        }
        Ok(acc)
    }

    /// Applies an elementary function coefficientwise via its recurrence.
    pub fn apply(&self, f: &Elementary) -> Result<Self, JetError> {
        elementary::apply(f, self)
    }
}

impl Jet<Rational> {
    /// The same jet at extended precision.
    pub fn to_float(&self, prec: u32) -> Jet<Float> {
        Jet::from_parts(
            Float::with_val(prec, &self.base_point),
            self.coeffs.iter().map(|c| Float::with_val(prec, c)).collect(),
        )
    }
}

pub(crate) fn lift_integer<T: Scalar>(like: &T, value: &Integer) -> T {
    like.lift(&Rational::from(value))
}

/// Equal in exact mode; agreeing to all but a few trailing bits in float mode.
pub(crate) fn points_agree<T: Scalar>(a: &T, b: &T) -> bool {
    if a == b {
        return true;
    }
    match a.mode() {
        NumericMode::ExactRational => false,
        NumericMode::Extended { bits } => {
            let (fa, fb) = (a.to_float(bits), b.to_float(bits));
            let diff = Float::with_val(bits, &fa - &fb).abs();
            let scale = Float::with_val(bits, fa.abs_ref()).max(&Float::with_val(bits, fb.abs_ref())).max(&Float::with_val(bits, 1));
            let limit = scale >> bits.saturating_sub(8);
            diff.partial_cmp(&limit) != Some(Ordering::Greater)
        }
    }
}
