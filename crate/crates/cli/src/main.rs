//! `carleman`: weight-sequence transforms, chain-rule tables, jets and bound
//! certification from the command line.
//!
//! Exit codes: 0 success, 1 a verification found a violation, 2 bad input.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use carleman_core::harness::{
    certify_premise, example1_report, example2_build, verify_lemma32, verify_lemma41, verify_prop2, verify_theorem1,
    verify_zero_bound, BoundSource, CoefficientFamily, Corpus, Grid, VerificationReport,
};
use carleman_core::io::{
    btable_csv_rows, dc_json, jet_json, parse_sequence, regularized_json, report_csv, report_json, sequence_json,
    to_pretty, OutputFormat, RunConfig, BTABLE_CSV_HEADER, REPORT_CSV_HEADER,
};
use carleman_core::jet::{JetError, OrderBudget};
use carleman_core::numeric::{format_rational, parse_rational};
use carleman_core::sequence::{dc_partial_sums, hat_regularize, log_convex_minorant, power_transform_sequence};
use carleman_core::substitution::{b_table, b_tables};
use carleman_core::{Family, NamedFunction, WeightSequence};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Float, Rational};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "carleman", version, about = "Power substitution in Carleman classes: sequences, jets, tables, certification")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Mantissa bits for extended-precision values.
    #[arg(long, global = true, env = "CARLEMAN_PRECISION_BITS", default_value_t = 256)]
    precision_bits: u32,
    /// Largest jet order accepted without complaint.
    #[arg(long, global = true, default_value_t = 64)]
    max_order: usize,
    /// Bound checks pass when actual <= bound * (1 + 2^-E).
    #[arg(long, global = true, default_value_t = 100)]
    tolerance_exp: u32,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; `btable` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SequenceInput {
    /// Sequence file (JSON).
    #[arg(long = "in", value_name = "FILE", conflicts_with = "family")]
    input: Option<PathBuf>,
    /// Registry family, e.g. `gevrey:1`, `gevrey:s=2,b=3`, `constant:1`.
    #[arg(long)]
    family: Option<String>,
    /// Last index to use; defaults to the whole explicit prefix.
    #[arg(long)]
    upto: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Largest log-convex minorant and its hull support.
    Regularize(SequenceInput),
    /// Denjoy-Carleman partial sums and quasianalyticity verdict.
    Dc(SequenceInput),
    /// Power transform (`--k`) or factorial repair (`--hat`).
    Transform {
        #[command(flatten)]
        seq: SequenceInput,
        #[arg(long, conflicts_with = "hat", required_unless_present = "hat")]
        k: Option<u32>,
        #[arg(long)]
        hat: bool,
    },
    /// Chain-rule coefficients for derivatives of g(x^k), as CSV.
    Btable {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        /// Emit every order 1..=n.
        #[arg(long)]
        all: bool,
    },
    /// Taylor jet of a registry function.
    Jets {
        /// Function id, optionally with `:params` (e.g. `exp_power:3`).
        #[arg(long)]
        name: String,
        /// Parameters, if not given after the id.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value = "0")]
        x0: String,
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = JetMode::Auto)]
        mode: JetMode,
    },
    /// Certify a bound on a grid.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum JetMode {
    /// Exact when representable, otherwise extended precision.
    Auto,
    Exact,
    Float,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    pair: String,
    /// Registry file replacing the built-in corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Suite {
    /// |g^(n)(x)| <= 2^n M_n x^-(1-1/k)n on the grid.
    Theorem1 {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 16)]
        orders: usize,
        #[arg(long, default_value = "dyadic:16")]
        grid: String,
        /// Bound source for sup|f^(n)|: `const:..`, `values:..`, `family:..` or `measure`.
        #[arg(long = "override-M")]
        override_m: Option<String>,
    },
    /// Membership of g in the transformed class, with x = 0 and the Taylor identity.
    Prop2 {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10)]
        orders: usize,
        #[arg(long, default_value = "dyadic:16")]
        grid: String,
        #[arg(long = "override-M")]
        override_m: Option<String>,
    },
    /// Three-branch bound for lower derivatives.
    Lemma32 {
        #[command(flatten)]
        pair: PairArgs,
        /// Defaults to 1/k.
        #[arg(long)]
        sigma: Option<String>,
        /// Weight sequence of the premise (family descriptor).
        #[arg(long = "M", default_value = "gevrey:1")]
        m: String,
        #[arg(long, default_value_t = 8)]
        orders: usize,
        #[arg(long, default_value = "dyadic:12")]
        grid: String,
    },
    /// Bound on f = g(x^k) from a certified premise on g.
    Lemma41 {
        /// Registry function g.
        #[arg(long, default_value = "cosh_sqrt")]
        g: String,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long = "M", default_value = "gevrey:1")]
        m: String,
        #[arg(long, default_value_t = 12)]
        orders: usize,
        #[arg(long, default_value = "dyadic:12")]
        grid: String,
    },
    /// |d^n e^(-1/x)| <= n! 2^n / x^n.
    Example1 {
        #[arg(long, default_value_t = 15)]
        orders: usize,
        #[arg(long, default_value = "dyadic:15")]
        grid: String,
    },
    /// Truncated Fourier split h_+ and h_- and their class fit.
    Example2 {
        /// `power:P`, `geometric:r` or `explicit:a0,a1,...`.
        #[arg(long, default_value = "power:10")]
        coefficients: String,
        #[arg(long, default_value_t = 40)]
        truncation: usize,
        #[arg(long, default_value_t = 12)]
        orders: usize,
        #[arg(long, default_value = "dyadic:12")]
        grid: String,
    },
    /// |g^(n)(0)| against the fitted M_kn/(kn)!^(1-1/k) bound.
    ZeroBound {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 8)]
        orders: usize,
        #[arg(long, default_value = "dyadic:16")]
        grid: String,
        #[arg(long = "override-M")]
        override_m: Option<String>,
    },
}

/// Why a command did not succeed.
enum Failure {
    Violation,
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let config = RunConfig {
        precision_bits: g.precision_bits,
        max_order: g.max_order,
        tolerance_exp: g.tolerance_exp,
        format: match (g.format, &cli.command) {
            (Some(Format::Json), _) => OutputFormat::Json,
            (Some(Format::Csv), _) | (None, Command::Btable { .. }) => OutputFormat::Csv,
            (None, _) => OutputFormat::Json,
        },
    };
    config.validate().map_err(|e| anyhow!(e))?;
    let (text, passed) = match &cli.command {
        Command::Regularize(seq) => (regularize(seq, &config)?, true),
        Command::Dc(seq) => (dc(seq, &config)?, true),
        Command::Transform { seq, k, hat } => (transform(seq, *k, *hat, &config)?, true),
        Command::Btable { n, k, all } => (btable(*n, *k, *all, &config)?, true),
        Command::Jets { name, params, x0, order, mode } => (jets(name, params.as_deref(), x0, *order, *mode, &config)?, true),
        Command::Verify { suite } => verify(suite, &config)?,
    };
    emit(&text, g.out.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(seq: &SequenceInput, config: &RunConfig) -> Result<WeightSequence> {
    let m = match (&seq.input, &seq.family) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            parse_sequence(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(desc)) => WeightSequence::family(Family::parse(desc)?),
        _ => bail!("give a sequence with --in FILE or --family DESCRIPTOR"),
    };
    Ok(m.with_precision(config.precision_bits))
}

fn default_upto(seq: &SequenceInput, m: &WeightSequence) -> Result<usize> {
    match (seq.upto, m.available()) {
        (Some(u), _) => Ok(u),
        (None, Some(len)) => Ok(len - 1),
        (None, None) => bail!("--upto is required for family sequences"),
    }
}

fn regularize(seq: &SequenceInput, config: &RunConfig) -> Result<String> {
    let m = load(seq, config)?;
    let reg = log_convex_minorant(&m, default_upto(seq, &m)?)?;
    Ok(match config.format {
        OutputFormat::Json => to_pretty(&regularized_json(&reg)),
        OutputFormat::Csv => {
            let mut s = String::from("n,value,support\n");
            for (n, v) in reg.values().iter().enumerate() {
                let _ = writeln!(s, "{n},{v},{}", reg.is_support(n));
            }
            s
        }
    })
}

fn dc(seq: &SequenceInput, config: &RunConfig) -> Result<String> {
    let m = load(seq, config)?;
    let upto = default_upto(seq, &m)?;
    let d = dc_partial_sums(&m, upto)?;
    Ok(match config.format {
        OutputFormat::Json => to_pretty(&dc_json(&m, upto, &d)),
        OutputFormat::Csv => {
            let mut s = String::from("N,partial_sum\n");
            for (i, v) in d.partial_sums.iter().enumerate() {
                let _ = writeln!(s, "{},{v}", i + 1);
            }
            s
        }
    })
}

fn transform(seq: &SequenceInput, k: Option<u32>, hat: bool, config: &RunConfig) -> Result<String> {
    let m = load(seq, config)?;
    let (out, upto) = if hat {
        let upto = default_upto(seq, &m)?;
        (hat_regularize(&m, upto)?, upto)
    } else {
        let k = k.expect("clap requires --k without --hat");
        let upto = match (seq.upto, m.available()) {
            (Some(u), _) => u,
            (None, Some(len)) if k > 1 && len >= 2 => (len - 2) / k as usize,
            (None, Some(_)) => 0,
            (None, None) => bail!("--upto is required for family sequences"),
        };
        (power_transform_sequence(&m, k, upto)?, upto)
    };
    Ok(match config.format {
        OutputFormat::Json => to_pretty(&sequence_json(&out, upto)?),
        OutputFormat::Csv => {
            let mut s = String::from("n,value\n");
            for (n, v) in out.prefix(upto + 1)?.values().iter().enumerate() {
                let _ = writeln!(s, "{n},{v}");
            }
            s
        }
    })
}

fn btable(n: usize, k: u32, all: bool, config: &RunConfig) -> Result<String> {
    let tables = if all { b_tables(n, k)? } else { vec![b_table(n, k)?] };
    Ok(match config.format {
        OutputFormat::Csv => {
            let mut s = format!("{BTABLE_CSV_HEADER}\n");
            for t in &tables {
                btable_csv_rows(t, &mut s);
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = tables
                .iter()
                .flat_map(|t| {
                    t.entries()
                        .map(|(i, j, b)| json!({"n": t.n(), "k": t.k(), "i": i, "j": j, "B": b.to_string()}))
                        .collect::<Vec<_>>()
                })
                .collect();
            to_pretty(&json!({"n": n, "k": k, "entries": rows}))
        }
    })
}

fn jets(name: &str, params: Option<&str>, x0: &str, order: usize, mode: JetMode, config: &RunConfig) -> Result<String> {
    let f = match (name.split_once(':'), params) {
        (Some(_), Some(_)) => bail!("give parameters either after the id or with --params, not both"),
        (Some(_), None) => NamedFunction::parse(name)?,
        (None, p) => NamedFunction::from_parts(name, p)?,
    };
    let x = parse_rational(x0).with_context(|| format!("bad --x0 `{x0}`"))?;
    let budget = OrderBudget::new(config.max_order);
    let label = f.to_string();
    let as_float = || -> Result<Value> {
        let xf = Float::with_val(config.precision_bits, &x);
        Ok(jet_json(&label, &f.jet(&xf, order, budget)?))
    };
    let value = match mode {
        JetMode::Float => as_float()?,
        JetMode::Exact => jet_json(&label, &f.jet(&x, order, budget)?),
        JetMode::Auto => match f.jet(&x, order, budget) {
            Ok(jet) => jet_json(&label, &jet),
            Err(JetError::NotRepresentable(_)) => as_float()?,
            Err(e) => return Err(e.into()),
        },
    };
    Ok(match config.format {
        OutputFormat::Json => to_pretty(&value),
        OutputFormat::Csv => {
            let mut s = String::from("j,coefficient,derivative\n");
            let (c, d) = (value["coefficients"].as_array().unwrap(), value["derivatives"].as_array().unwrap());
            for (j, (c, d)) in c.iter().zip(d).enumerate() {
                let _ = writeln!(s, "{j},{},{}", c.as_str().unwrap(), d.as_str().unwrap());
            }
            s
        }
    })
}

fn corpus(args: &PairArgs, config: &RunConfig) -> Result<Corpus> {
    Ok(match &args.corpus {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            Corpus::from_json(&text, config.precision_bits)?
        }
        None => Corpus::builtin(config.precision_bits),
    })
}

fn bounds(spec: &Option<String>, config: &RunConfig) -> Result<Option<BoundSource>> {
    spec.as_deref().map(|s| BoundSource::parse(s, config.precision_bits)).transpose().map_err(Into::into)
}

fn family_sequence(desc: &str, config: &RunConfig) -> Result<WeightSequence> {
    Ok(WeightSequence::family(Family::parse(desc)?).with_precision(config.precision_bits))
}

fn verify(suite: &Suite, config: &RunConfig) -> Result<(String, bool)> {
    let cfg = config.harness();
    let reports: Vec<VerificationReport> = match suite {
        Suite::Theorem1 { pair, orders, grid, override_m } => {
            let corpus = corpus(pair, config)?;
            let b = bounds(override_m, config)?;
            vec![verify_theorem1(corpus.get(&pair.pair)?, *orders, &Grid::parse(grid)?, b.as_ref(), &cfg)?]
        }
        Suite::Prop2 { pair, orders, grid, override_m } => {
            let corpus = corpus(pair, config)?;
            let b = bounds(override_m, config)?;
            vec![verify_prop2(corpus.get(&pair.pair)?, *orders, &Grid::parse(grid)?, b.as_ref(), &cfg)?]
        }
        Suite::ZeroBound { pair, orders, grid, override_m } => {
            let corpus = corpus(pair, config)?;
            let b = bounds(override_m, config)?;
            vec![verify_zero_bound(corpus.get(&pair.pair)?, *orders, &Grid::parse(grid)?, b.as_ref(), &cfg)?]
        }
        Suite::Lemma32 { pair, sigma, m, orders, grid } => {
            let corpus = corpus(pair, config)?;
            let p = corpus.get(&pair.pair)?;
            let sigma = match sigma {
                Some(s) => parse_rational(s).with_context(|| format!("bad --sigma `{s}`"))?,
                None => Rational::from((1, p.k)),
            };
            if sigma.cmp0().is_le() || sigma >= 1 {
                bail!("sigma must lie in (0, 1), got {}", format_rational(&sigma));
            }
            let m = family_sequence(m, config)?;
            vec![verify_lemma32(p, &sigma, &m, *orders, &Grid::parse(grid)?, &cfg)?]
        }
        Suite::Lemma41 { g, k, m, orders, grid } => {
            if *k < 2 {
                bail!("k must be an integer > 1, got {k}");
            }
            let g = NamedFunction::parse(g)?;
            let m = family_sequence(m, config)?;
            let grid = Grid::parse(grid)?;
            let a = Rational::from(1) - Rational::from((1, *k));
            let premise = certify_premise(&g, &m, &a, *orders, &grid, &cfg)?;
            vec![verify_lemma41(&g, *k, &m, *orders, &grid, Some(&premise), &cfg)?]
        }
        Suite::Example1 { orders, grid } => vec![example1_report(*orders, &Grid::parse(grid)?, &cfg)?],
        Suite::Example2 { coefficients, truncation, orders, grid } => {
            let family = CoefficientFamily::parse(coefficients)?;
            let ex = example2_build(&family, *truncation, *orders, &Grid::parse(grid)?, &cfg)?;
            let passed = ex.plus.passed() && ex.minus.passed();
            let text = match config.format {
                OutputFormat::Json => to_pretty(&json!({
                    "suite": "example2",
                    "coefficients": coefficients,
                    "truncation": truncation,
                    "h_plus": ex.h_plus.to_string(),
                    "h_minus": ex.h_minus.to_string(),
                    "verdict": if passed { "pass" } else { "fail" },
                    "plus": report_json(&ex.plus),
                    "minus": report_json(&ex.minus),
                })),
                OutputFormat::Csv => reports_csv(&[ex.plus, ex.minus]),
            };
            return Ok((text, passed));
        }
    };
    let passed = reports.iter().all(VerificationReport::passed);
    let text = match config.format {
        OutputFormat::Json => to_pretty(&report_json(&reports[0])),
        OutputFormat::Csv => reports_csv(&reports),
    };
    Ok((text, passed))
}

fn reports_csv(reports: &[VerificationReport]) -> String {
    let mut s = format!("{REPORT_CSV_HEADER}\n");
    for r in reports {
        report_csv(r, &mut s);
    }
    s
}
