use std::cmp::Ordering;

use carleman_core::harness::{
    example1_report, fit_normalized, verify_theorem1, ClassMembershipQuery, Corpus, Grid, HarnessConfig, Sample,
};
use carleman_core::io::report_json;
use carleman_core::jet::OrderBudget;
use carleman_core::numeric::{factorial, Number};
use carleman_core::sequence::{
    check_log_convex, dc_partial_sums, hat_regularize, log_convex_minorant, power_transform_sequence,
};
use carleman_core::substitution::{b_growth_check, b_table, lemma_power_sub_bound, reconstruct_derivative};
use carleman_core::{Family, Jet, NamedFunction, WeightSequence};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

const PREC: u32 = 256;

fn budget() -> OrderBudget {
    OrderBudget::default()
}

fn rational(range: std::ops::RangeInclusive<i64>, den: u32) -> impl Strategy<Value = Rational> {
    (range, 1..=den).prop_map(|(p, q)| Rational::from((p, q)))
}

fn exact(v: &Number) -> Rational {
    v.as_exact().cloned().expect("exact value")
}

fn exact_values(m: &WeightSequence, len: usize) -> Vec<Rational> {
    m.prefix(len).unwrap().values().iter().map(exact).collect()
}

fn rel_err(a: &Float, b: &Float) -> Float {
    let d = Float::with_val(PREC, a - b).abs();
    let s = Float::with_val(PREC, b.abs_ref());
    if s.is_zero() {
        d
    } else {
        d / s
    }
}

fn tiny(bits: u32) -> Float {
    Float::with_val(PREC, 1) >> bits
}

/// `ln M^C_n` straight from the min/inf formula over straddling pairs.
fn brute_minorant_logs(logs: &[Rational]) -> Vec<Rational> {
    let last = logs.len() - 1;
    (0..=last)
        .map(|n| {
            let mut best = logs[n].clone();
            for j in 0..n {
                for l in n + 1..=last {
                    let w = Rational::from(((l - n) as i64, (l - j) as u64));
                    let v = Rational::from(&w * &logs[j]) + (Rational::from(1) - w) * &logs[l];
                    if v < best {
                        best = v;
                    }
                }
            }
            best
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_equals_brute_force_formula(logs in prop::collection::vec(rational(-100..=100, 10), 3..=16)) {
        let m = WeightSequence::from_logs("random", &logs).unwrap();
        let reg = log_convex_minorant(&m, logs.len() - 1).unwrap();
        let expected = brute_minorant_logs(&logs);
        for (n, e) in expected.iter().enumerate() {
            prop_assert_eq!(reg.exact_log(n), Some(e.clone()), "index {}", n);
        }
    }

    #[test]
    fn minorant_is_idempotent(logs in prop::collection::vec(rational(-100..=100, 10), 3..=16)) {
        let upto = logs.len() - 1;
        let once = log_convex_minorant(&WeightSequence::from_logs("m", &logs).unwrap(), upto).unwrap();
        let twice = log_convex_minorant(&once.to_sequence("mc"), upto).unwrap();
        for n in 0..=upto {
            prop_assert_eq!(once.exact_log(n), twice.exact_log(n));
        }
        prop_assert_eq!(twice.support().len(), upto + 1);
    }

    #[test]
    fn minorant_is_maximal(
        logs in prop::collection::vec(rational(-100..=100, 10), 3..=16),
        slopes in prop::collection::vec(rational(-40..=40, 4), 15),
    ) {
        // Any convex sequence shifted under M stays under M^C.
        let upto = logs.len() - 1;
        let mut slopes = slopes[..upto].to_vec();
        slopes.sort();
        let mut convex = vec![Rational::new()];
        for s in &slopes {
            let next = Rational::from(convex.last().unwrap() + s);
            convex.push(next);
        }
        let shift = (0..=upto).map(|n| Rational::from(&convex[n] - &logs[n])).max().unwrap();
        let reg = log_convex_minorant(&WeightSequence::from_logs("m", &logs).unwrap(), upto).unwrap();
        for n in 0..=upto {
            let below = Rational::from(&convex[n] - &shift);
            prop_assert!(below <= reg.exact_log(n).unwrap());
        }
    }

    #[test]
    fn hat_invariants(values in prop::collection::vec(rational(1..=1000, 50), 30)) {
        let m = WeightSequence::from_values("random", &values).unwrap();
        let h = hat_regularize(&m, 29).unwrap();
        let hv = exact_values(&h, 30);
        prop_assert_eq!(&hv[0], &values[0]);
        for n in 0..30 {
            prop_assert!(hv[n] >= values[n]);
            if n > 0 {
                prop_assert!(Rational::from(&hv[n] / &hv[n - 1]) >= n as u64);
            }
        }
    }

    #[test]
    fn hat_preserves_log_convexity(slopes in prop::collection::vec(rational(-20..=60, 4), 20)) {
        let mut slopes = slopes;
        slopes.sort();
        let mut logs = vec![Rational::new()];
        for s in &slopes {
            let next = Rational::from(logs.last().unwrap() + s);
            logs.push(next);
        }
        let m = WeightSequence::from_logs("convex", &logs).unwrap();
        prop_assert!(check_log_convex(&m, 20).unwrap());
        prop_assert!(check_log_convex(&hat_regularize(&m, 20).unwrap(), 20).unwrap());
    }

    #[test]
    fn power_transform_is_monotone(
        values in prop::collection::vec(rational(1..=500, 20), 22),
        bumps in prop::collection::vec(rational(0..=500, 20), 22),
        k in 2u32..=3,
    ) {
        let bigger: Vec<Rational> = values.iter().zip(&bumps).map(|(v, b)| Rational::from(v + b)).collect();
        let upto = (22 - 2) / k as usize;
        let small = power_transform_sequence(&WeightSequence::from_values("m", &values).unwrap(), k, upto).unwrap();
        let large = power_transform_sequence(&WeightSequence::from_values("m2", &bigger).unwrap(), k, upto).unwrap();
        let (s, l) = (exact_values(&small, upto + 1), exact_values(&large, upto + 1));
        for n in 0..=upto {
            prop_assert!(s[n] <= l[n]);
        }
    }

    #[test]
    fn dc_partial_sums_nondecreasing(logs in prop::collection::vec(rational(-100..=100, 10), 3..=16)) {
        let m = WeightSequence::from_logs("m", &logs).unwrap();
        let d = dc_partial_sums(&m, logs.len() - 1).unwrap();
        for w in d.partial_sums.windows(2) {
            prop_assert_ne!(w[0].compare(&w[1]), Ordering::Greater);
        }
    }

    #[test]
    fn product_matches_leibniz(
        a in prop::collection::vec(rational(-50..=50, 7), 13),
        b in prop::collection::vec(rational(-50..=50, 7), 13),
        x0 in rational(-4..=4, 3),
    ) {
        let ja = Jet::new(x0.clone(), a, budget()).unwrap();
        let jb = Jet::new(x0, b, budget()).unwrap();
        let prod = ja.mul(&jb).unwrap();
        let (da, db) = (ja.derivatives(), jb.derivatives());
        for n in 0..=12usize {
            let mut leibniz = Rational::new();
            for i in 0..=n {
                let binom = Integer::from(Integer::binomial_u(n as u32, i as u32));
                leibniz += Rational::from(&da[i] * &db[n - i]) * binom;
            }
            prop_assert_eq!(prod.derivative(n).unwrap(), leibniz);
        }
    }

    #[test]
    fn composition_is_associative(
        f in prop::collection::vec(rational(-9..=9, 5), 4),
        g in prop::collection::vec(rational(-9..=9, 5), 4),
        h in prop::collection::vec(rational(-9..=9, 5), 4),
        x0 in rational(-3..=3, 2),
    ) {
        let pad = |mut c: Vec<Rational>| { c.resize(7, Rational::new()); c };
        let jf = Jet::new(x0, pad(f), budget()).unwrap();
        let jg = Jet::new(jf.value().clone(), pad(g), budget()).unwrap();
        let jh = Jet::new(jg.value().clone(), pad(h), budget()).unwrap();
        let left = Jet::compose(&Jet::compose(&jh, &jg).unwrap(), &jf).unwrap();
        let right = Jet::compose(&jh, &Jet::compose(&jg, &jf).unwrap()).unwrap();
        prop_assert_eq!(left.coeffs(), right.coeffs());
    }

    #[test]
    fn reconstruction_matches_jet_oracle_exactly(
        num in prop::collection::vec(rational(-9..=9, 4), 1..=4),
        den_tail in prop::collection::vec(rational(-1..=1, 4), 0..=3),
        k in 2u32..=4,
        xi in 1usize..=3,
    ) {
        // Denominator 1 + small terms stays away from zero on y in [0, 1].
        let mut den = vec![Rational::from(4)];
        den.extend(den_tail);
        let g = NamedFunction::RationalFn { num, den };
        let x = Rational::from((xi as i64, 4));
        let y = Rational::from(x.clone().pow(k));
        let g_jet = g.jet(&y, 12, budget()).unwrap();
        let inner = Jet::variable(x.clone(), 12, budget()).unwrap().powi(k);
        let f_jet = Jet::compose(&g_jet, &inner).unwrap();
        for n in 1..=12 {
            let table = b_table(n, k).unwrap();
            let via_table = reconstruct_derivative(&table, &x, &g_jet).unwrap();
            prop_assert_eq!(via_table, f_jet.derivative(n).unwrap(), "n={} k={}", n, k);
        }
    }

    #[test]
    fn fit_scales_with_the_samples(
        d in prop::collection::vec(0u32..1000, 2..=8),
        c in 2u32..50,
    ) {
        let mut d: Vec<Float> = d.into_iter().map(|v| Float::with_val(PREC, v)).collect();
        d[0] = Float::with_val(PREC, &d[0] + 1u32);
        let scaled: Vec<Float> = d.iter().map(|v| Float::with_val(PREC, v * c)).collect();
        let base = fit_normalized(d.clone(), "B");
        let fit = fit_normalized(scaled.clone(), "B");
        prop_assert_eq!(&fit.a, &Float::with_val(PREC, &base.a * c));
        for (n, (dn, sn)) in d.iter().zip(&scaled).enumerate() {
            let before = Float::with_val(PREC, dn / &base.a);
            let after = Float::with_val(PREC, sn / &fit.a);
            prop_assert!(rel_err(&after, &before) < tiny(240) || before.is_zero(), "n={}", n);
        }
        prop_assert!(rel_err(&fit.growth, &base.growth) < tiny(240) || base.growth.is_zero());
    }
}

#[test]
fn reconstruction_matches_exp_oracle() {
    for k in [2u32, 3, 4] {
        for xi in [1u32, 2, 3] {
            let x = Float::with_val(PREC, Rational::from((xi, 4)));
            let y = Float::with_val(PREC, x.clone().pow(k));
            let g_jet = NamedFunction::Exp.jet(&y, 12, budget()).unwrap();
            let inner = Jet::variable(x.clone(), 12, budget()).unwrap().powi(k);
            let f_jet = Jet::compose(&g_jet, &inner).unwrap();
            for n in 1..=12 {
                let r = reconstruct_derivative(&b_table(n, k).unwrap(), &x, &g_jet).unwrap();
                assert!(rel_err(&r, &f_jet.derivative(n).unwrap()) < tiny(200), "k={k} x={xi}/4 n={n}");
            }
        }
    }
}

#[test]
fn growth_bound_with_c_equal_2k() {
    for k in 2u32..=5 {
        for n in 1..=30 {
            let g = b_growth_check(n, k, &Rational::from(2 * k)).unwrap();
            assert!(g.holds, "n={n} k={k} worst={:?}", g.worst);
        }
    }
}

/// `g(y) = (y - y0)^i / i!` isolates `B_n(i, n - i) x^(i(k-1) - (n-i))`.
fn table_entry_from_jets(n: usize, k: u32, i: usize, x: &Rational) -> Rational {
    let y0 = Rational::from(x.clone().pow(k));
    let mut coeffs = vec![Rational::new(); n + 1];
    coeffs[i] = Rational::from(1) / Rational::from(factorial(i as u32));
    let g = Jet::new(y0, coeffs, budget()).unwrap();
    let inner = Jet::variable(x.clone(), n, budget()).unwrap().powi(k);
    let d = Jet::compose(&g, &inner).unwrap().derivative(n).unwrap();
    let power = i as i32 * (k as i32 - 1) - (n - i) as i32;
    d / x.clone().pow(power)
}

#[test]
fn table_entries_do_not_depend_on_the_point() {
    for k in [2u32, 3] {
        for n in 1..=8 {
            let table = b_table(n, k).unwrap();
            for i in 1..=n {
                let expected = Rational::from(table.get(i, n - i));
                for x in [Rational::from((1, 3)), Rational::from((5, 7))] {
                    assert_eq!(table_entry_from_jets(n, k, i, &x), expected, "n={n} k={k} i={i} x={x}");
                }
            }
        }
    }
}

#[test]
fn polynomial_jets_match_closed_form_derivatives() {
    let p: Vec<Rational> = [3, -1, 0, 2, 5, 0, -7, 1].iter().map(|&c| Rational::from((c, 3))).collect();
    let x0 = Rational::from((-2, 5));
    let jet = NamedFunction::Polynomial(p.clone()).jet(&x0, 20, budget()).unwrap();
    for n in 0..=20usize {
        // d^n/dx^n sum p_m x^m = sum_{m >= n} p_m m!/(m-n)! x^(m-n)
        let mut expected = Rational::new();
        for (m, c) in p.iter().enumerate().skip(n) {
            let falling = Rational::from(factorial(m as u32)) / Rational::from(factorial((m - n) as u32));
            expected += Rational::from(c * falling) * x0.clone().pow((m - n) as u32);
        }
        assert_eq!(jet.derivative(n).unwrap(), expected, "n={n}");
    }
}

#[test]
fn transcendental_jets_match_closed_form_derivatives() {
    let x0 = Float::with_val(PREC, Rational::from((3, 7)));
    let exp = NamedFunction::Exp.jet(&x0, 20, budget()).unwrap();
    let cosh = NamedFunction::Cosh.jet(&x0, 20, budget()).unwrap();
    let a: Vec<Rational> = [1, 2, 3].iter().map(|&d| Rational::from((1, d))).collect();
    let decay = NamedFunction::ExpDecayFourier(a.clone()).jet(&x0, 20, budget()).unwrap();
    let e = Float::with_val(PREC, x0.exp_ref());
    let (ch, sh) = (Float::with_val(PREC, x0.cosh_ref()), Float::with_val(PREC, x0.sinh_ref()));
    for n in 0..=20usize {
        assert!(rel_err(&exp.derivative(n).unwrap(), &e) < tiny(200), "exp n={n}");
        let hyper = if n % 2 == 0 { &ch } else { &sh };
        assert!(rel_err(&cosh.derivative(n).unwrap(), hyper) < tiny(200), "cosh n={n}");
        let mut expected = Float::new(PREC);
        for (j, aj) in a.iter().enumerate() {
            let rate = Float::with_val(PREC, -(j as i64));
            let term = Float::with_val(PREC, Float::with_val(PREC, &rate * &x0).exp_ref()) * rate.pow(n as u32);
            expected += Float::with_val(PREC, term * aj);
        }
        assert!(rel_err(&decay.derivative(n).unwrap(), &expected) < tiny(200), "decay n={n}");
    }
}

#[test]
fn power_sub_bound_nonincreasing_in_x() {
    let m = WeightSequence::family(Family::gevrey(1));
    for k in [2u32, 3] {
        for n in 1..=10 {
            let mut prev: Option<Float> = None;
            for j in 1..=20u32 {
                let x = Float::with_val(PREC, Float::u_exp(1, -(21 - j as i32)));
                let b = lemma_power_sub_bound(&m, k, n, &x).unwrap();
                if let Some(p) = prev {
                    assert!(b <= p, "k={k} n={n} j={j}");
                }
                prev = Some(b);
            }
        }
    }
}

#[test]
fn condensation_lower_bound_for_factorials() {
    let n = 10_000;
    let h = hat_regularize(&WeightSequence::family(Family::gevrey(1)), n).unwrap();
    let d = dc_partial_sums(&h, n).unwrap();
    let s = d.last().unwrap().to_float(PREC);
    let half_log = Float::with_val(PREC, Float::with_val(PREC, n as u32).ln() / 2u32);
    assert!(s > half_log, "S = {s}");
}

#[test]
fn example1_bound_holds_and_flattens() {
    let cfg = HarnessConfig::default();
    let report = example1_report(15, &Grid::dyadic(15).unwrap(), &cfg).unwrap();
    assert!(report.passed());
    let ratios_ok = report.rows.iter().all(|r| r.ratio <= 1);
    assert!(ratios_ok);
    assert!(report.flatness.iter().all(|f| f.decreasing_tail));
}

#[test]
fn reports_are_byte_identical() {
    let cfg = HarnessConfig::default();
    let corpus = Corpus::builtin(cfg.precision);
    let pair = corpus.get("cosh2").unwrap();
    let grid = Grid::dyadic(8).unwrap();
    let run = || report_json(&verify_theorem1(pair, 8, &grid, None, &cfg).unwrap()).to_string();
    assert_eq!(run(), run());
}

#[test]
fn scaled_membership_samples_scale_a() {
    let m = vec![Float::with_val(PREC, 1); 3];
    let sample = |n: usize, v: u32| Sample { n, x: Rational::from(1), value: Float::with_val(PREC, v) };
    let query = |c: u32| ClassMembershipQuery {
        m: m.clone(),
        a: Rational::new(),
        samples: vec![sample(0, 2 * c), sample(1, 4 * c), sample(2, 32 * c)],
    };
    let (one, three) = (
        carleman_core::harness::fit_class_constants(&query(1)),
        carleman_core::harness::fit_class_constants(&query(3)),
    );
    assert_eq!(three.a, Float::with_val(PREC, &one.a * 3u32));
    assert!(rel_err(&three.growth, &one.growth) < tiny(240));
}
