//! Largest log-convex minorant `M^C` as the lower convex hull of the points
//! `(n, ln M_n)`, built with a monotone chain.

use rug::ops::Pow;
use rug::{Float, Rational};

use super::{Prefix, SequenceError, WeightSequence};
use crate::numeric::{exact_root, Number};

#[derive(Debug, Clone)]
pub struct RegularizedSequence {
    source: WeightSequence,
    prefix: Prefix,
    support: Vec<usize>,
}

/// Computes `M^C_0..M^C_upto`.
///
/// The minorant is the lower hull of `(n, ln M_n)` for `0 <= n <= upto`.
/// Collinear points stay on the hull, so they count as support indices.
pub fn log_convex_minorant(m: &WeightSequence, upto: usize) -> Result<RegularizedSequence, SequenceError> {
    let prefix = m.prefix(upto + 1)?;
    let one = Rational::from(1);
    let mut hull: Vec<usize> = Vec::with_capacity(upto + 1);
    for c in 0..=upto {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // (c-b) L_a - (c-a) L_b + (b-a) L_c < 0  <=>  b lies strictly above chord a-c
            let (a_, b_, c_) = (a as i64, b as i64, c as i64);
            let terms = [(a, c_ - b_), (b, -(c_ - a_)), (c, b_ - a_)];
            if prefix.compare_log_combination(&terms, &one).is_lt() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(c);
    }
    Ok(RegularizedSequence {
        source: m.clone(),
        prefix,
        support: hull,
    })
}

impl RegularizedSequence {
    pub fn source(&self) -> &WeightSequence {
        &self.source
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn upto(&self) -> usize {
        self.prefix.len() - 1
    }

    /// Hull vertices, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_support(&self, n: usize) -> bool {
        self.support.binary_search(&n).is_ok()
    }

    /// Adjacent support indices `l <= n <= r` (`l == r` on the support).
    pub fn bracket(&self, n: usize) -> (usize, usize) {
        match self.support.binary_search(&n) {
            Ok(_) => (n, n),
            Err(pos) => (self.support[pos - 1], self.support[pos]),
        }
    }

    /// `ln M^C_n` at working precision.
    pub fn log_value(&self, n: usize) -> Float {
        let (l, r) = self.bracket(n);
        if l == r {
            return self.prefix.log(n).clone();
        }
        let wp = self.prefix.log(n).prec();
        let left = Float::with_val(wp, (r - n) as u64 * self.prefix.log(l));
        let right = Float::with_val(wp, (n - l) as u64 * self.prefix.log(r));
        Float::with_val(wp, left + right) / (r - l) as u64
    }

    /// Exact `ln M^C_n` when the source was given by rational logarithms.
    pub fn exact_log(&self, n: usize) -> Option<Rational> {
        let (l, r) = self.bracket(n);
        let ll = self.prefix.exact_log(l)?;
        let lr = self.prefix.exact_log(r)?;
        if l == r {
            return Some(ll.clone());
        }
        let num = Rational::from((r - n) as u64) * ll + Rational::from((n - l) as u64) * lr;
        Some(num / Rational::from((r - l) as u64))
    }

    /// `M^C_n`; exact whenever the interpolated power is a rational number.
    pub fn value(&self, n: usize) -> Number {
        let (l, r) = self.bracket(n);
        if l == r {
            return self.prefix.value(n);
        }
        if let Number::Exact(ml) = self.prefix.value(l) {
            let growth = self.product_of_steps(l, r).expect("exact prefix stores ratios");
            // M^C_n^(r-l) = M_l^(r-l) * (M_r/M_l)^(n-l)
            let power = ml.pow((r - l) as u32) * growth.pow((n - l) as u32);
            if let Some(root) = exact_root(&power, (r - l) as u32) {
                return Number::Exact(root);
            }
        }
        Number::Approx(Float::with_val(self.prefix.precision(), self.log_value(n).exp_ref()))
    }

    pub fn values(&self) -> Vec<Number> {
        (0..=self.upto()).map(|n| self.value(n)).collect()
    }

    /// `M^C_n / M^C_{n+1}`.
    pub fn ratio(&self, n: usize) -> Number {
        let l = match self.support.binary_search(&n) {
            Ok(_) => n,
            Err(pos) => self.support[pos - 1],
        };
        let r = match self.support.binary_search(&(n + 1)) {
            Ok(_) => n + 1,
            Err(pos) => self.support[pos],
        };
        if r == l + 1 {
            return self.prefix.ratio_down(l);
        }
        if let Some(growth) = self.product_of_steps(l, r) {
            if let Some(root) = exact_root(&growth.recip(), (r - l) as u32) {
                return Number::Exact(root);
            }
        }
        if let (Some(ll), Some(lr)) = (self.prefix.exact_log(l), self.prefix.exact_log(r)) {
            if ll == lr {
                return Number::Exact(Rational::from(1));
            }
        }
        let wp = self.prefix.log(l).prec();
        let slope = Float::with_val(wp, self.prefix.log(l) - self.prefix.log(r)) / (r - l) as u64;
        Number::Approx(Float::with_val(self.prefix.precision(), slope.exp_ref()))
    }

    /// `M_r / M_l` for exact-ratio prefixes.
    fn product_of_steps(&self, l: usize, r: usize) -> Option<Rational> {
        let mut acc = Rational::from(1);
        for m in l..r {
            acc *= self.prefix.exact_step(m)?;
        }
        Some(acc)
    }

    /// The minorant as a standalone explicit sequence.
    pub fn to_sequence(&self, name: impl Into<String>) -> WeightSequence {
        let prec = self.prefix.precision();
        let exact_logs: Option<Vec<Rational>> = (0..=self.upto()).map(|n| self.exact_log(n)).collect();
        if let Some(logs) = exact_logs {
            return WeightSequence::explicit(name, Prefix::from_logs(&logs, prec));
        }
        let values = self.values();
        if let Some(exact) = values.iter().map(|v| v.as_exact().cloned()).collect::<Option<Vec<_>>>() {
            return WeightSequence::explicit(name, Prefix::from_values(&exact, prec).expect("minorant of a positive sequence"));
        }
        let logs = (0..=self.upto()).map(|n| self.log_value(n)).collect();
        WeightSequence::explicit(name, Prefix::from_float_logs(logs, prec))
    }
}
