use std::cmp::Ordering;

use rug::{Float, Rational};

use super::{Prefix, SequenceError, WeightSequence};
use crate::numeric::{factorial, Number};

/// `M^(k)_n = n! * max_{j <= nk+1} M_j / j!` for `0 <= n <= upto`.
pub fn power_transform_sequence(m: &WeightSequence, k: u32, upto: usize) -> Result<WeightSequence, SequenceError> {
    if k < 2 {
        return Err(SequenceError::BadPower(k));
    }
    let prefix = m.prefix(upto * k as usize + 2)?;
    let out = power_transform_values(&prefix.values(), k, upto, prefix.precision())?;
    Ok(from_numbers(format!("{}^({k})", m.name()), &out, prefix.precision()))
}

/// The same transform on a nonnegative list, e.g. measured derivative suprema.
pub fn power_transform_values(values: &[Number], k: u32, upto: usize, prec: u32) -> Result<Vec<Number>, SequenceError> {
    if k < 2 {
        return Err(SequenceError::BadPower(k));
    }
    let needed = upto * k as usize + 2;
    if values.len() < needed {
        return Err(SequenceError::InsufficientPrefix {
            needed,
            available: values.len(),
        });
    }
    let mut out = Vec::with_capacity(upto + 1);
    let mut best: Option<Number> = None;
    let mut next_j = 0usize;
    for n in 0..=upto {
        let last = n * k as usize + 1;
        while next_j <= last {
            let scaled = divide_by_factorial(&values[next_j], next_j as u32, prec);
            if best.as_ref().is_none_or(|b| scaled.compare(b) == Ordering::Greater) {
                best = Some(scaled);
            }
            next_j += 1;
        }
        let n_fact = Number::Exact(Rational::from(factorial(n as u32)));
        out.push(best.as_ref().expect("j = 0 always visited").mul(&n_fact, prec));
    }
    Ok(out)
}

fn divide_by_factorial(value: &Number, j: u32, prec: u32) -> Number {
    match value {
        Number::Exact(v) => Number::Exact(Rational::from(v / factorial(j))),
        Number::Approx(v) => Number::Approx(Float::with_val(prec, v / Float::with_val(prec, factorial(j)))),
    }
}

fn from_numbers(name: String, values: &[Number], prec: u32) -> WeightSequence {
    match values.iter().map(|v| v.as_exact().cloned()).collect::<Option<Vec<_>>>() {
        Some(exact) => WeightSequence::explicit(name, Prefix::from_values(&exact, prec).expect("positive input")),
        None => {
            let floats: Vec<Float> = values.iter().map(|v| v.to_float(prec)).collect();
            WeightSequence::explicit(name, Prefix::from_floats(&floats, prec).expect("positive input"))
        }
    }
}

/// `M̂_0 = M_0`, `M̂_n = M̂_{n-1} * max(M_n / M_{n-1}, n)`.
///
/// The result dominates `M`, has `M̂_n / n!` nondecreasing, and is
/// log-convex whenever `M` is.
pub fn hat_regularize(m: &WeightSequence, upto: usize) -> Result<WeightSequence, SequenceError> {
    let prefix = m.prefix(upto + 1)?;
    let prec = prefix.precision();
    let name = format!("hat({})", m.name());
    if let Some(first) = prefix.exact_first() {
        let ratios = (1..=upto)
            .map(|n| {
                let q = prefix.exact_step(n - 1).expect("exact ratios");
                let floor = Rational::from(n as u64);
                if *q > floor { q.clone() } else { floor }
            })
            .collect();
        return Ok(WeightSequence::explicit(name, Prefix::from_ratios(first.clone(), ratios, prec)));
    }
    let wp = prefix.log(0).prec();
    let mut logs = Vec::with_capacity(upto + 1);
    logs.push(prefix.log(0).clone());
    for n in 1..=upto {
        let step = Float::with_val(wp, prefix.log(n) - prefix.log(n - 1));
        let floor = Float::with_val(wp, n as u64).ln();
        let inc = if step > floor { step } else { floor };
        let next = Float::with_val(wp, &logs[n - 1] + inc);
        logs.push(next);
    }
    Ok(WeightSequence::explicit(name, Prefix::from_float_logs(logs, prec)))
}

/// All second differences of `ln M_n` on `0..=upto` are `>= 0`.
pub fn check_log_convex(m: &WeightSequence, upto: usize) -> Result<bool, SequenceError> {
    Ok(prefix_is_log_convex(&m.prefix(upto + 1)?))
}

/// `M_{n+1} / M_n >= n + 1` on `0..=upto`, i.e. `M_n / n!` nondecreasing.
pub fn check_factorial_monotone(m: &WeightSequence, upto: usize) -> Result<bool, SequenceError> {
    Ok(prefix_is_factorial_monotone(&m.prefix(upto + 1)?))
}

pub(crate) fn prefix_is_log_convex(p: &Prefix) -> bool {
    let one = Rational::from(1);
    (1..p.len().saturating_sub(1)).all(|n| p.compare_log_combination(&[(n - 1, 1), (n, -2), (n + 1, 1)], &one).is_ge())
}

pub(crate) fn prefix_is_factorial_monotone(p: &Prefix) -> bool {
    (0..p.len().saturating_sub(1)).all(|n| {
        let floor = Rational::from(n as u64 + 1);
        match p.exact_step(n) {
            Some(q) => *q >= floor,
            None => p.compare_log_combination(&[(n + 1, 1), (n, -1)], &floor).is_ge(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::Family;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    fn exact_values(m: &WeightSequence) -> Vec<Rational> {
        m.prefix(m.available().unwrap())
            .unwrap()
            .values()
            .into_iter()
            .map(|v| v.as_exact().cloned().expect("exact"))
            .collect()
    }

    #[test]
    fn factorials_are_fixed_by_power_transform() {
        let m = WeightSequence::family(Family::gevrey(1));
        let t = power_transform_sequence(&m, 2, 8).unwrap();
        let expected: Vec<Rational> = (0..=8).map(|n| Rational::from(factorial(n))).collect();
        assert_eq!(exact_values(&t), expected);
    }

    #[test]
    fn squared_factorials_pick_the_last_index() {
        let m = WeightSequence::family(Family::gevrey(2));
        let t = power_transform_sequence(&m, 2, 6).unwrap();
        let expected: Vec<Rational> = (0..=6u32).map(|n| Rational::from(factorial(n) * factorial(2 * n + 1))).collect();
        assert_eq!(exact_values(&t), expected);
    }

    #[test]
    fn geometric_factorials() {
        let m = WeightSequence::family(Family::parse("gevrey:s=1,b=2").unwrap());
        let t = power_transform_sequence(&m, 2, 6).unwrap();
        let expected: Vec<Rational> = (0..=6u32)
            .map(|n| Rational::from(factorial(n)) * Rational::from(rug::Integer::from(1) << (2 * n + 1)))
            .collect();
        assert_eq!(exact_values(&t), expected);
    }

    #[test]
    fn transform_states_required_length() {
        let m = WeightSequence::from_values("short", &ints(&[1, 1, 2, 6, 24])).unwrap();
        let err = power_transform_sequence(&m, 2, 10).unwrap_err();
        assert_eq!(err, SequenceError::InsufficientPrefix { needed: 22, available: 5 });
        assert_eq!(power_transform_sequence(&m, 1, 1).unwrap_err(), SequenceError::BadPower(1));
    }

    #[test]
    fn hat_of_constant_is_factorial() {
        let m = WeightSequence::family(Family::constant(1));
        let h = hat_regularize(&m, 12).unwrap();
        let expected: Vec<Rational> = (0..=12).map(|n| Rational::from(factorial(n))).collect();
        assert_eq!(exact_values(&h), expected);
    }

    #[test]
    fn hat_fixes_factorials_and_squares() {
        for s in [1, 2] {
            let m = WeightSequence::family(Family::gevrey(s));
            let h = hat_regularize(&m, 12).unwrap();
            assert_eq!(exact_values(&h), m.prefix(13).unwrap().values().iter().map(|v| v.as_exact().unwrap().clone()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn hat_on_log_specified_input() {
        // ln M = (0, 0, 0): ratios 1 lose to n, so M̂ = n!.
        let m = WeightSequence::from_logs("flat", &ints(&[0, 0, 0, 0])).unwrap();
        let h = hat_regularize(&m, 3).unwrap();
        let v = h.prefix(4).unwrap().values();
        let err = Float::with_val(256, v[3].to_float(256) - 6u32).abs();
        assert!(err < Float::with_val(256, 1) >> 200u32);
    }

    #[test]
    fn convexity_and_monotonicity_checks() {
        let fact = WeightSequence::family(Family::gevrey(1));
        assert!(check_log_convex(&fact, 20).unwrap());
        assert!(check_factorial_monotone(&fact, 20).unwrap());
        let dip = WeightSequence::from_values("m144", &ints(&[1, 4, 4])).unwrap();
        assert!(!check_log_convex(&dip, 2).unwrap());
        let ones = WeightSequence::family(Family::constant(1));
        assert!(check_log_convex(&ones, 20).unwrap());
        assert!(!check_factorial_monotone(&ones, 20).unwrap());
    }
}
