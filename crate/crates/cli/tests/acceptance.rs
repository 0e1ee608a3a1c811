//! Acceptance run: one PASS/FAIL line per criterion with its runtime.
//! Exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use carleman_core::harness::{
    example1_report, example2_build, verify_lemma32, verify_lemma41, verify_prop2, verify_theorem1, certify_premise,
    BoundSource, CoefficientFamily, Corpus, Grid, HarnessConfig,
};
use carleman_core::jet::OrderBudget;
use carleman_core::numeric::{factorial, Number};
use carleman_core::sequence::{
    classify_quasianalytic, dc_partial_sums, hat_regularize, log_convex_minorant, Verdict,
};
use carleman_core::substitution::{b_growth_check, b_table, reconstruct_derivative};
use carleman_core::{Family, Jet, NamedFunction, WeightSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Rational};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: u32) -> Rational {
    let den = rng.random_range(1..=max_den);
    let num = rng.random_range(lo * den as i64..=hi * den as i64);
    Rational::from((num, den))
}

/// `ln M^C_n` from the min over straddling pairs.
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

fn c1_minorant_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..200 {
        let len = rng.random_range(3..=16);
        let logs: Vec<Rational> = (0..len).map(|_| random_rational(&mut rng, -10, 10, 12)).collect();
        let reg = log_convex_minorant(&WeightSequence::from_logs("random", &logs).map_err(err)?, len - 1).map_err(err)?;
        for (n, expected) in brute_minorant_logs(&logs).iter().enumerate() {
            ensure(reg.exact_log(n).as_ref() == Some(expected), format!("case {case}, index {n}"))?;
        }
    }
    Ok("200 sequences, exact agreement".into())
}

fn c2_btable_oracle() -> Check {
    let table_values = |n, k| -> Result<Vec<String>, String> {
        Ok(b_table(n, k).map_err(err)?.entries().map(|(_, _, b)| b.to_string()).collect())
    };
    ensure(table_values(2, 2)? == ["2", "4"], "n=2 table")?;
    ensure(table_values(3, 2)? == ["12", "8"], "n=3 table")?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let budget = OrderBudget::default();
    let mut checked = 0;
    for k in [2u32, 3, 4] {
        let num: Vec<Rational> = (0..4).map(|_| random_rational(&mut rng, -5, 5, 6)).collect();
        let mut den = vec![Rational::from(4)];
        den.extend((0..3).map(|_| random_rational(&mut rng, -1, 1, 6)));
        let g = NamedFunction::RationalFn { num, den };
        for xi in [1, 2, 3] {
            let x = Rational::from((xi, 4));
            let y = Rational::from(x.clone().pow(k));
            let g_jet = g.jet(&y, 12, budget).map_err(err)?;
            let inner = Jet::variable(x.clone(), 12, budget).map_err(err)?.powi(k);
            let f_jet = Jet::compose(&g_jet, &inner).map_err(err)?;
            for n in 1..=12 {
                let via_table = reconstruct_derivative(&b_table(n, k).map_err(err)?, &x, &g_jet).map_err(err)?;
                ensure(via_table == f_jet.derivative(n).map_err(err)?, format!("k={k} x={x} n={n} ({g})"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} exact comparisons, hand tables match"))
}

fn c3_growth() -> Check {
    for k in 2u32..=5 {
        for n in 1..=30 {
            let g = b_growth_check(n, k, &Rational::from(2 * k)).map_err(err)?;
            ensure(g.holds, format!("n={n} k={k} worst {:?}", g.worst))?;
        }
    }
    Ok("n <= 30, k in 2..=5, C = 2k".into())
}

fn c4_theorem1(cfg: &HarnessConfig, corpus: &Corpus) -> Check {
    let pair = corpus.get("cosh2").map_err(err)?;
    let grid = Grid::dyadic(20).map_err(err)?;
    let m = BoundSource::parse("const:cosh(1)", cfg.precision).map_err(err)?;
    let r = verify_theorem1(pair, 20, &grid, Some(&m), cfg).map_err(err)?;
    ensure(r.passed(), format!("worst row {:?}", r.worst_row().map(|w| (w.n, w.x.to_string()))))?;
    let worst = r.worst_row().map(|w| w.ratio.to_f64()).unwrap_or(0.0);
    let low = BoundSource::parse("const:1/10", cfg.precision).map_err(err)?;
    let control = verify_theorem1(pair, 20, &grid, Some(&low), cfg).map_err(err)?;
    ensure(!control.passed(), "negative control M = 1/10 passed")?;
    Ok(format!("{} rows, worst ratio {worst:.4}; control fails", r.rows.len()))
}

fn c5_prop2(cfg: &HarnessConfig, corpus: &Corpus) -> Check {
    let r = verify_prop2(corpus.get("cosh2").map_err(err)?, 10, &Grid::dyadic(20).map_err(err)?, None, cfg).map_err(err)?;
    ensure(r.grid.contains(&Rational::new()), "grid lacks x = 0")?;
    let fit = r.fit.as_ref().ok_or("no fit")?;
    let d0 = r.deriv0.as_ref().ok_or("no Taylor identity check")?;
    ensure(d0.exact && d0.holds, format!("identity at 0: exact={} mismatches={:?}", d0.exact, d0.mismatches))?;
    ensure(r.passed(), "suite verdict fail")?;
    ensure(fit.a <= 4 && fit.growth <= 16, format!("A={} B={}", fit.a.to_f64(), fit.growth.to_f64()))?;
    Ok(format!("A = {:.4}, B = {:.4}, identity exact for n <= 10", fit.a.to_f64(), fit.growth.to_f64()))
}

fn c6_lemma32(cfg: &HarnessConfig, corpus: &Corpus) -> Check {
    let m = WeightSequence::family(Family::gevrey(1));
    let sigma = Rational::from((1, 2));
    let grid = Grid::dyadic(12).map_err(err)?;
    let orders = 8;
    let a = Rational::from(1) - &sigma;
    let mut certified = Vec::new();
    for pair in &corpus.pairs {
        // Only pairs whose g satisfies the lemma's premise on this grid take part.
        if certify_premise(&pair.g, &m, &a, orders, &grid, cfg).is_err() {
            continue;
        }
        let r = verify_lemma32(pair, &sigma, &m, orders, &grid, cfg).map_err(err)?;
        ensure(r.passed(), format!("{}: worst {:?}", pair.id, r.worst_row().map(|w| (w.n, w.ell, w.x.to_string()))))?;
        for tag in ["ell-above", "ell-equal", "ell-below"] {
            ensure(r.rows.iter().any(|row| row.branch == tag), format!("{}: branch {tag} not exercised", pair.id))?;
        }
        certified.push(pair.id.clone());
    }
    ensure(certified.iter().any(|id| id == "cosh2"), "cosh2 not certified")?;
    Ok(format!("all three branches hold for {}", certified.join(", ")))
}

fn c7_lemma41(cfg: &HarnessConfig) -> Check {
    let g = NamedFunction::CoshSqrt;
    let m = WeightSequence::family(Family::gevrey(1));
    let grid = Grid::dyadic(12).map_err(err)?;
    let premise = certify_premise(&g, &m, &Rational::from((1, 2)), 12, &grid, cfg).map_err(err)?;
    let r = verify_lemma41(&g, 2, &m, 12, &grid, Some(&premise), cfg).map_err(err)?;
    let fit = r.fit.as_ref().ok_or("no fit")?;
    ensure(r.passed(), "suite verdict fail")?;
    ensure(fit.is_finite() && fit.growth <= 4, format!("C = {}", fit.growth.to_f64()))?;
    ensure(r.rows.iter().filter(|row| row.n % 2 == 1).all(|row| row.branch == "no-log"), "odd row with log factor")?;
    Ok(format!("A = {:.4}, C = {:.4}, odd rows without log factor", fit.a.to_f64(), fit.growth.to_f64()))
}

fn exact_values(m: &WeightSequence, len: usize) -> Result<Vec<Rational>, String> {
    m.prefix(len).map_err(err)?.values().iter().map(|v| v.as_exact().cloned().ok_or_else(|| "inexact".to_string())).collect()
}

fn c8_hat() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..100 {
        let values: Vec<Rational> = (0..30).map(|_| Rational::from((rng.random_range(1..=10_000i64), rng.random_range(1..=100u32)))).collect();
        let h = exact_values(&hat_regularize(&WeightSequence::from_values("r", &values).map_err(err)?, 29).map_err(err)?, 30)?;
        for n in 0..30 {
            ensure(h[n] >= values[n], format!("case {case}: hat below M at {n}"))?;
            if n > 0 {
                ensure(Rational::from(&h[n] / &h[n - 1]) >= n as u64, format!("case {case}: ratio at {n}"))?;
            }
        }
    }
    let facts: Vec<Rational> = (0..=29).map(|n| Rational::from(factorial(n))).collect();
    let constant = exact_values(&hat_regularize(&WeightSequence::family(Family::constant(1)), 29).map_err(err)?, 30)?;
    ensure(constant == facts, "constant does not map to n!")?;
    let fixed = exact_values(&hat_regularize(&WeightSequence::family(Family::gevrey(1)), 29).map_err(err)?, 30)?;
    ensure(fixed == facts, "gevrey(1) is not fixed")?;
    Ok("100 random sequences; constant -> n!; n! fixed".into())
}

fn c9_dc() -> Check {
    let verdict = |d: &str| Family::parse(d).map(|f| classify_quasianalytic(&WeightSequence::family(f)).verdict);
    ensure(verdict("gevrey:1").map_err(err)? == Verdict::Quasianalytic, "gevrey(1)")?;
    ensure(verdict("gevrey:2").map_err(err)? == Verdict::NotQuasianalytic, "gevrey(2)")?;
    ensure(verdict("constant:1").map_err(err)? == Verdict::Quasianalytic, "constant")?;
    let n = 10_000;
    let d = dc_partial_sums(&WeightSequence::family(Family::gevrey(1)), n).map_err(err)?;
    let s = d.last().ok_or("no sums")?.to_float(256);
    let half_log = Float::with_val(256, n as u32).ln() / 2u32;
    ensure(s > half_log, format!("S = {} <= {}", s.to_f64(), half_log.to_f64()))?;
    ensure(matches!(d.last(), Some(Number::Exact(_))), "sum not exact")?;
    Ok(format!("S_10000 = {:.4} > {:.4}", s.to_f64(), half_log.to_f64()))
}

fn c10_example1(cfg: &HarnessConfig) -> Check {
    let r = example1_report(15, &Grid::dyadic(15).map_err(err)?, cfg).map_err(err)?;
    ensure(r.passed(), "bound violated")?;
    let worst = r.worst_row().map(|w| w.ratio.to_f64()).unwrap_or(0.0);
    Ok(format!("{} rows, worst ratio {worst:.4}", r.rows.len()))
}

fn c11_example2(cfg: &HarnessConfig) -> Check {
    let ex = example2_build(&CoefficientFamily::Power(10), 40, 12, &Grid::dyadic(12).map_err(err)?, cfg).map_err(err)?;
    let mut parts = Vec::new();
    for (label, r) in [("h+", &ex.plus), ("h-", &ex.minus)] {
        let fit = r.fit.as_ref().ok_or("no fit")?;
        ensure(fit.is_finite() && fit.growth <= cfg.ceiling(), format!("{label}: B = {}", fit.growth.to_f64()))?;
        ensure(r.passed(), format!("{label}: verdict fail"))?;
        parts.push(format!("{label} A = {:.4}, B = {:.4}", fit.a.to_f64(), fit.growth.to_f64()));
    }
    Ok(parts.join("; "))
}

fn c12_cli() -> Check {
    let tests = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests");
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_carleman"))
            .current_dir(tests.join("fixtures"))
            .env_remove("CARLEMAN_PRECISION_BITS")
            .args(args)
            .output()
            .map_err(err)
    };
    let goldens: &[(&str, &[&str], i32)] = &[
        ("regularize_m144.json", &["regularize", "--in", "m144.json"], 0),
        ("dc_gevrey1.json", &["dc", "--family", "gevrey:1", "--upto", "4"], 0),
        ("transform_hat_const1.json", &["transform", "--hat", "--in", "const1.json"], 0),
        ("btable_3_2.csv", &["btable", "--n", "3", "--k", "2"], 0),
        ("jets_cosh_sqrt.json", &["jets", "--name", "cosh_sqrt", "--x0", "0", "--order", "3"], 0),
        (
            "verify_theorem1_cosh2.csv",
            &["verify", "theorem1", "--pair", "cosh2", "--orders", "20", "--grid", "dyadic:20", "--format", "csv"],
            0,
        ),
        ("verify_theorem1_control.json", &["verify", "theorem1", "--pair", "cosh2", "--orders", "4", "--grid", "dyadic:4", "--override-M", "const:0.1"], 1),
    ];
    for (name, args, code) in goldens {
        let first = run(args)?;
        ensure(first.status.code() == Some(*code), format!("{args:?}: exit {:?}", first.status.code()))?;
        let expected = std::fs::read(tests.join("golden").join(name)).map_err(err)?;
        ensure(first.stdout == expected, format!("{name} differs"))?;
        ensure(run(args)?.stdout == first.stdout, format!("{name} rerun differs"))?;
    }
    let bad = run(&["transform", "--k", "2", "--in", "short.json", "--upto", "10"])?;
    ensure(bad.status.code() == Some(2), "short prefix exit code")?;
    ensure(run(&["regularize", "--in", "malformed.json"])?.status.code() == Some(2), "malformed JSON exit code")?;
    Ok(format!("{} goldens byte-identical across reruns; exit codes 0/1/2", goldens.len()))
}

fn main() {
    let cfg = HarnessConfig::default();
    let corpus = Corpus::builtin(cfg.precision);
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Check + '_>)> = vec![
        ("1 minorant oracle equivalence", Duration::from_secs(5), Box::new(c1_minorant_oracle)),
        ("2 chain-rule table vs jet oracle", Duration::from_secs(10), Box::new(c2_btable_oracle)),
        ("3 table growth bound", Duration::from_secs(10), Box::new(c3_growth)),
        ("4 theorem 1 cosh pair", Duration::from_secs(30), Box::new(|| c4_theorem1(&cfg, &corpus))),
        ("5 transformed-class membership", Duration::from_secs(10), Box::new(|| c5_prop2(&cfg, &corpus))),
        ("6 three-branch lower-derivative bound", Duration::from_secs(10), Box::new(|| c6_lemma32(&cfg, &corpus))),
        ("7 log-factor bound for f = g(x^k)", Duration::from_secs(10), Box::new(|| c7_lemma41(&cfg))),
        ("8 sequence transforms", Duration::from_secs(2), Box::new(c8_hat)),
        ("9 quasianalyticity diagnostics", Duration::from_secs(2), Box::new(c9_dc)),
        ("10 flat function bound", Duration::from_secs(10), Box::new(|| c10_example1(&cfg))),
        ("11 truncated Fourier split", Duration::from_secs(20), Box::new(|| c11_example2(&cfg))),
        ("12 command-line contract", Duration::from_secs(10), Box::new(c12_cli)),
    ];
    let mut failures = 0;
    for (name, limit, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; over the {}s limit", limit.as_secs())),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}  ({:.2}s)  {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failures += 1;
                println!("FAIL  {name}  ({:.2}s)  {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
