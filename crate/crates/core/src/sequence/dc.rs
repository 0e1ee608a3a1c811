use std::fmt;

use rug::Rational;
use serde::Serialize;

use super::{log_convex_minorant, Family, SequenceError, WeightSequence};
use crate::numeric::Number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Quasianalytic,
    NotQuasianalytic,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Quasianalytic => "quasianalytic",
            Verdict::NotQuasianalytic => "not-quasianalytic",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictBasis {
    ClosedForm,
    PrefixOnly,
}

impl fmt::Display for VerdictBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictBasis::ClosedForm => "closed-form",
            VerdictBasis::PrefixOnly => "prefix-only",
        })
    }
}

/// Registry entry for a family: the verdict, its ratio series and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub basis: VerdictBasis,
    pub ratio_series: String,
    pub justification: String,
}

/// Denjoy–Carleman verdict. Only registry families get a definite answer;
/// divergence cannot be decided from a finite prefix.
pub fn classify_quasianalytic(m: &WeightSequence) -> Classification {
    match m.as_family() {
        Some(f) => classify_family(f),
        None => Classification {
            verdict: Verdict::Inconclusive,
            basis: VerdictBasis::PrefixOnly,
            ratio_series: "unknown".into(),
            justification: "explicit prefixes do not determine divergence".into(),
        },
    }
}

fn classify_family(f: &Family) -> Classification {
    let closed = |verdict, ratio_series: String, justification: &str| Classification {
        verdict,
        basis: VerdictBasis::ClosedForm,
        ratio_series,
        justification: justification.into(),
    };
    match f {
        Family::Gevrey { s, b, .. } => {
            let verdict = if *s <= 1 { Verdict::Quasianalytic } else { Verdict::NotQuasianalytic };
            closed(
                verdict,
                format!("M_n/M_(n+1) = 1/({b}*(n+1)^{s})"),
                "log-convex; p-series sum (n+1)^-s diverges iff s <= 1",
            )
        }
        Family::Constant { .. } => closed(
            Verdict::Quasianalytic,
            "M_n/M_(n+1) = 1".into(),
            "log-convex; sum of ones diverges",
        ),
        Family::DenjoyLog { s, .. } => {
            let verdict = if *s <= 1 { Verdict::Quasianalytic } else { Verdict::NotQuasianalytic };
            closed(
                verdict,
                format!("M_n/M_(n+1) ~ 1/(n*ln(n)^{s})"),
                "log-convex since n*ln(ln(n+e)) is convex; Bertrand series diverges iff s <= 1",
            )
        }
    }
}

#[derive(Debug, Clone)]
pub struct DcDiagnostics {
    /// `S_1..S_N` with `S_N = sum_{n<N} M^C_n / M^C_{n+1}`.
    pub partial_sums: Vec<Number>,
    pub verdict: Verdict,
    pub basis: VerdictBasis,
}

impl DcDiagnostics {
    pub fn last(&self) -> Option<&Number> {
        self.partial_sums.last()
    }
}

/// Partial sums of the Denjoy–Carleman series on `M^C` of `M_0..M_upto`.
pub fn dc_partial_sums(m: &WeightSequence, upto: usize) -> Result<DcDiagnostics, SequenceError> {
    let reg = log_convex_minorant(m, upto)?;
    let prec = m.precision();
    let mut sum = Number::Exact(Rational::new());
    let mut partial_sums = Vec::with_capacity(upto);
    for n in 0..upto {
        sum = sum.add(&reg.ratio(n), prec);
        partial_sums.push(sum.clone());
    }
    let class = classify_quasianalytic(m);
    Ok(DcDiagnostics {
        partial_sums,
        verdict: class.verdict,
        basis: class.basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_partial_sum_for_factorials() {
        let d = dc_partial_sums(&WeightSequence::family(Family::gevrey(1)), 4).unwrap();
        assert_eq!(d.last(), Some(&Number::Exact(Rational::from((25, 12)))));
        assert_eq!(d.verdict, Verdict::Quasianalytic);
        assert_eq!(d.basis, VerdictBasis::ClosedForm);
    }

    #[test]
    fn constant_sum_counts_terms() {
        let d = dc_partial_sums(&WeightSequence::family(Family::constant(1)), 5).unwrap();
        let sums: Vec<String> = d.partial_sums.iter().map(ToString::to_string).collect();
        assert_eq!(sums, ["1", "2", "3", "4", "5"]);
    }

    #[test]
    fn squared_factorials() {
        let d = dc_partial_sums(&WeightSequence::family(Family::gevrey(2)), 2).unwrap();
        assert_eq!(d.last(), Some(&Number::Exact(Rational::from((5, 4)))));
        assert_eq!(d.verdict, Verdict::NotQuasianalytic);
    }

    #[test]
    fn explicit_prefix_is_inconclusive() {
        let vals: Vec<Rational> = [1, 1, 2, 6].iter().map(|&v| Rational::from(v)).collect();
        let d = dc_partial_sums(&WeightSequence::from_values("nfact", &vals).unwrap(), 3).unwrap();
        assert_eq!(d.verdict, Verdict::Inconclusive);
        assert_eq!(d.basis, VerdictBasis::PrefixOnly);
    }

    #[test]
    fn registry_verdicts() {
        let v = |d: &str| classify_quasianalytic(&WeightSequence::family(Family::parse(d).unwrap())).verdict;
        assert_eq!(v("gevrey:1"), Verdict::Quasianalytic);
        assert_eq!(v("gevrey:2"), Verdict::NotQuasianalytic);
        assert_eq!(v("gevrey:1/2"), Verdict::Quasianalytic);
        assert_eq!(v("constant:1"), Verdict::Quasianalytic);
        assert_eq!(v("denjoy_log:1"), Verdict::Quasianalytic);
        assert_eq!(v("denjoy_log:2"), Verdict::NotQuasianalytic);
    }
}
