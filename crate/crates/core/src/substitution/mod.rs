//! Chain-rule tables for `f(x) = g(x^k)` and the explicit bound formulas
//! used to certify derivative estimates of power substitutions.
//!
//! `f^(n)(x) = sum_{i+j=n} B_n(i,j) g^(i)(x^k) x^(i(k-1)-j)`, with
//! `B_1(1,0) = k` and
//! `B_{n+1}(i,j) = k B_n(i-1,j) + (i(k-1) - (j-1)) B_n(i,j-1)`.

mod bounds;

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Integer, Rational};
use thiserror::Error;

use crate::jet::{points_agree, Jet, JetError};
use crate::numeric::Scalar;
use crate::sequence::SequenceError;

pub use bounds::{
    add_smooth_bound, lemma_add_smooth_bound, lemma_log_bound, lemma_power_sub_bound, log_bound, power_sub_bound,
    BoundCase, BoundValue,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstitutionError {
    #[error("the order-0 derivative has no chain-rule table; n must be >= 1")]
    ZeroOrder,
    #[error("power must be an integer > 1, got {0}")]
    BadPower(u32),
    #[error("table is for (n={table_n}, k={table_k}), requested (n={n}, k={k})")]
    TableMismatch { table_n: usize, table_k: u32, n: usize, k: u32 },
    #[error("{0}")]
    Domain(String),
    #[error("lemma hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// The row `B_n(i, n-i)` for `ceil(n/k) <= i <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BTable {
    n: usize,
    k: u32,
    /// `entries[i - first]` holds `B_n(i, n-i)`.
    entries: Vec<Integer>,
    first: usize,
}

impl BTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `B_n(i, j)`; zero outside the admissible region `i + j = n`, `ik >= n`.
    pub fn get(&self, i: usize, j: usize) -> Integer {
        if i + j != self.n || i < self.first {
            return Integer::new();
        }
        self.entries[i - self.first].clone()
    }

    /// `(i, j, B_n(i, j))` in increasing `i`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Integer)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(off, b)| (self.first + off, self.n - self.first - off, b))
    }

    fn next(&self) -> BTable {
        let (n, k) = (self.n + 1, self.k);
        let first = n.div_ceil(k as usize);
        let entries = (first..=n)
            .map(|i| {
                let j = n - i;
                let mut b = Integer::from(k) * self.get_signed(i as i64 - 1, j as i64);
                let factor = (i as i64) * (k as i64 - 1) - (j as i64 - 1);
                if j >= 1 {
                    b += Integer::from(factor) * self.get(i, j - 1);
                }
                b
            })
            .collect();
        BTable { n, k, entries, first }
    }

    fn get_signed(&self, i: i64, j: i64) -> Integer {
        if i < 0 || j < 0 {
            return Integer::new();
        }
        self.get(i as usize, j as usize)
    }
}

fn check_args(n: usize, k: u32) -> Result<(), SubstitutionError> {
    if k < 2 {
        return Err(SubstitutionError::BadPower(k));
    }
    if n == 0 {
        return Err(SubstitutionError::ZeroOrder);
    }
    Ok(())
}

/// Tables for orders `1..=n`.
pub fn b_tables(n: usize, k: u32) -> Result<Vec<BTable>, SubstitutionError> {
    check_args(n, k)?;
    let mut out = Vec::with_capacity(n);
    out.push(BTable {
        n: 1,
        k,
        entries: vec![Integer::from(k)],
        first: 1,
    });
    for _ in 1..n {
        let next = out.last().expect("nonempty").next();
        out.push(next);
    }
    Ok(out)
}

pub fn b_table(n: usize, k: u32) -> Result<BTable, SubstitutionError> {
    Ok(b_tables(n, k)?.pop().expect("n >= 1"))
}

/// `f^(n)(x)` for `f(x) = g(x^k)` from the table and a jet of `g` at `x^k`.
pub fn reconstruct_derivative<T: Scalar>(table: &BTable, x: &T, g_jet: &Jet<T>) -> Result<T, SubstitutionError> {
    let n = table.n;
    if g_jet.order() < n {
        return Err(JetError::OrderTooSmall {
            have: g_jet.order(),
            need: n,
        }
        .into());
    }
    let y = x.powi(table.k);
    if !points_agree(g_jet.base_point(), &y) {
        return Err(JetError::BasePointMismatch {
            left: g_jet.base_point().to_string(),
            right: y.to_string(),
        }
        .into());
    }
    let mut acc = x.zero();
    for (i, _, b) in table.entries() {
        // i(k-1) - j = ik - n >= 0 on the admissible region.
        let power = (i * table.k as usize - n) as u32;
        let term = g_jet.derivative(i)?.mul(&x.powi(power)).mul(&x.lift(&Rational::from(b)));
        acc = acc.add(&term);
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCheck {
    pub holds: bool,
    /// Entry maximizing `B_n(i,j) / (C^n n^(n-i))`.
    pub worst: (usize, usize),
    pub worst_ratio: Rational,
}

/// Checks `B_n(i,j) <= C^n n^(n-i)` on every entry, exactly.
pub fn b_growth_check(n: usize, k: u32, c: &Rational) -> Result<GrowthCheck, SubstitutionError> {
    if c.cmp0() != Ordering::Greater {
        return Err(SubstitutionError::Domain("growth constant must be > 0".into()));
    }
    let table = b_table(n, k)?;
    Ok(growth_of(&table, c))
}

pub fn growth_of(table: &BTable, c: &Rational) -> GrowthCheck {
    let n = table.n;
    let cn = Rational::from(c.pow(n as u32));
    let mut worst: Option<(usize, usize, Rational)> = None;
    for (i, j, b) in table.entries() {
        let bound = Rational::from(&cn * Integer::from(Integer::u_pow_u(n as u32, (n - i) as u32)));
        let ratio = Rational::from(b) / bound;
        if worst.as_ref().is_none_or(|w| ratio > w.2) {
            worst = Some((i, j, ratio));
        }
    }
    let (i, j, worst_ratio) = worst.expect("table rows are nonempty");
    GrowthCheck {
        holds: worst_ratio <= 1,
        worst: (i, j),
        worst_ratio,
    }
}
