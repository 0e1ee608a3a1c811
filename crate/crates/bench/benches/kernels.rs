use std::hint::black_box;

use carleman_core::harness::{verify_theorem1, Corpus, Grid, HarnessConfig};
use carleman_core::jet::OrderBudget;
use carleman_core::sequence::log_convex_minorant;
use carleman_core::substitution::{b_table, b_tables};
use carleman_core::{Jet, NamedFunction, WeightSequence};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rug::{Float, Rational};

fn minorant(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_convex_minorant");
    for len in [16usize, 256, 2048] {
        // A zig-zag of rational logarithms so the hull keeps only some points.
        let logs: Vec<Rational> = (0..len)
            .map(|n| Rational::from(((n * n) as i64 + if n % 3 == 0 { 7 } else { 0 }, 5)))
            .collect();
        let m = WeightSequence::from_logs("zigzag", &logs).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(len), &m, |b, m| {
            b.iter(|| log_convex_minorant(black_box(m), len - 1).unwrap())
        });
    }
    group.finish();
}

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("b_table");
    for (n, k) in [(12usize, 2u32), (30, 3), (60, 5)] {
        group.bench_function(format!("n{n}_k{k}"), |b| b.iter(|| b_table(black_box(n), black_box(k)).unwrap()));
    }
    group.bench_function("all_orders_n30_k4", |b| b.iter(|| b_tables(black_box(30), 4).unwrap()));
    group.finish();
}

fn jets(c: &mut Criterion) {
    let budget = OrderBudget::default();
    let mut group = c.benchmark_group("jet_compose");
    for order in [12usize, 32, 64] {
        let x = Rational::from((1, 3));
        let inner = Jet::variable(x.clone(), order, budget).unwrap().powi(3);
        let outer = NamedFunction::parse("rational:1|1,-1/2").unwrap().jet(inner.value(), order, budget).unwrap();
        group.bench_with_input(BenchmarkId::new("exact", order), &order, |b, _| {
            b.iter(|| Jet::compose(black_box(&outer), black_box(&inner)).unwrap())
        });
        let xf = Float::with_val(256, &x);
        let inner_f = Jet::variable(xf, order, budget).unwrap().powi(2);
        let outer_f = NamedFunction::CoshSqrt.jet(inner_f.value(), order, budget).unwrap();
        group.bench_with_input(BenchmarkId::new("float256", order), &order, |b, _| {
            b.iter(|| Jet::compose(black_box(&outer_f), black_box(&inner_f)).unwrap())
        });
    }
    group.finish();
}

fn suites(c: &mut Criterion) {
    let cfg = HarnessConfig::default();
    let corpus = Corpus::builtin(cfg.precision);
    let pair = corpus.get("cosh2").unwrap();
    let grid = Grid::dyadic(20).unwrap();
    c.bench_function("verify_theorem1_cosh2_n20", |b| {
        b.iter(|| verify_theorem1(black_box(pair), 20, &grid, None, &cfg).unwrap())
    });
}

criterion_group!(benches, minorant, tables, jets, suites);
criterion_main!(benches);
