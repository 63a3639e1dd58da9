//! The `proxinv` command line.
//!
//! Every subcommand produces a stream of records. `--format table` prints one
//! `key=value` line per record, `json-lines` one JSON object per record and
//! `csv` one row per record (with a header whenever the record kind changes).
//! Rationals always carry their exact numerator and denominator next to a
//! 12-significant-digit decimal rendering.
//!
//! Exit codes: 0 success, 1 violations found or identity failures, 2 usage or
//! configuration error, 3 resource bound exceeded.

use std::cmp::Ordering;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fib_core::{fib, run_identity, IdentityKind};
use crate::generic_proxinv::{check_system_streaming, ConstraintFunction};
use crate::numeration::{
    decode, encode, enumerate_valid, fib_two_fold, is_valid_fib, is_valid_fraenkel, DigitString, NumerationSystem,
    ValidityRule, DEFAULT_MAX_ENUMERATION_LENGTH,
};
use crate::optimum_search::{compare_with_conjecture, exact_optimum, FiniteInstance, SearchOptions, DEFAULT_MAX_POINTS};
use crate::pairs::{default_workers, VerifyOptions, Violation, ViolationReport, DEFAULT_MAX_PAIRS};
use crate::proxinv_fib::{
    compare_by_f, compare_by_value, f_of_digits, max_f_up_to_length, partial_sum_below_golden_ratio, supremum_partial,
    top_string, verify_range_streaming, OrderingVerdict,
};
use crate::rational::{parse_rational, to_decimal, ExactRational, Natural};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "proxinv", version, about = "Even-Fibonacci numeration and proximity inversion toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    JsonLines,
    Csv,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Print digit strings (and read them) most significant digit first.
    #[arg(long, global = true)]
    msd: bool,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true, env = "PROXINV_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, env = "PROXINV_MAX_PAIRS", default_value_t = DEFAULT_MAX_PAIRS)]
    max_pairs: u128,
    #[arg(long, global = true, env = "PROXINV_MAX_POINTS", default_value_t = DEFAULT_MAX_POINTS)]
    max_points: usize,
    #[arg(long, global = true, env = "PROXINV_MAX_ENUM_LEN", default_value_t = DEFAULT_MAX_ENUMERATION_LENGTH)]
    max_enum_len: usize,
}

/// Which numeration system to work in.
#[derive(Debug, Args)]
struct SystemOpts {
    /// Built-in system: fib-even or binary.
    #[arg(long, default_value = "fib-even", conflicts_with = "config")]
    system: String,
    /// Configuration document declaring a custom system.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fibonacci numbers F_from..=F_to.
    Fib { from: usize, to: Option<usize> },
    /// Basis elements u_from..=u_to.
    Basis {
        from: usize,
        to: Option<usize>,
        #[command(flatten)]
        system: SystemOpts,
    },
    /// Greedy representation of each integer.
    Encode {
        #[arg(required = true)]
        values: Vec<Natural>,
        #[command(flatten)]
        system: SystemOpts,
    },
    /// Value of a digit string (LSD first unless --msd).
    Decode {
        digits: String,
        #[command(flatten)]
        system: SystemOpts,
    },
    /// Run the validity checks on a digit string.
    Validate {
        digits: String,
        #[command(flatten)]
        system: SystemOpts,
    },
    /// All valid even-Fibonacci strings of length <= LEN, by value.
    Enumerate {
        #[arg(long)]
        len: usize,
    },
    /// f(a) for each integer.
    EvalF {
        #[arg(required = true)]
        values: Vec<Natural>,
    },
    /// Compare a and b by value and by f, through their digits alone.
    Compare { a: Natural, b: Natural },
    /// Check |f(a) - f(b)| >= c(b - a) for all 0 <= a < b <= MAX.
    Verify {
        #[arg(long)]
        max: u64,
        /// reciprocal, Q/n, constant:Q or Q
        #[arg(long, default_value = "1/n")]
        constraint: String,
    },
    /// Partial suprema 1 + Σ_{i<=n} 1/F_{2i} with their argmax.
    Sup {
        #[arg(long)]
        n: usize,
        /// Print every n' <= n, not just n.
        #[arg(long)]
        all: bool,
    },
    /// Check the Fibonacci identity suite over indices <= MAX.
    Identities {
        #[arg(long, default_value_t = 80)]
        max: u64,
        /// Restrict to these kinds (repeatable).
        #[arg(long = "kind")]
        kinds: Vec<String>,
        /// Failing parameter tuples to print per kind.
        #[arg(long, default_value_t = 3)]
        show: usize,
    },
    /// Exact optimum of a finite instance by exhaustive search.
    SearchOptimum {
        /// Comma-separated points.
        #[arg(long, value_delimiter = ',', conflicts_with = "size", required_unless_present = "size")]
        points: Vec<u64>,
        /// Use {1, …, SIZE}.
        #[arg(long)]
        size: Option<u64>,
        #[arg(long, default_value = "1/n")]
        constraint: String,
    },
    /// Exact optimum on {1, …, F_{2n}} next to the conjectured bound.
    Conjecture {
        #[arg(long)]
        n: usize,
    },
    /// Pairwise check of f_S for a general system.
    CheckSystem {
        #[arg(long)]
        max: u64,
        /// Overrides the configuration's constraint.
        #[arg(long)]
        constraint: Option<String>,
        #[command(flatten)]
        system: SystemOpts,
    },
}

/// One field of an output record.
#[derive(Debug, Clone)]
enum Field {
    Count(u128),
    Nat(Natural),
    Text(String),
    Flag(bool),
    Rational(ExactRational),
    Digits(DigitString),
    Counts(Vec<u64>),
    Missing,
}

struct Record {
    kind: &'static str,
    fields: Vec<(&'static str, Field)>,
}

impl Record {
    fn new(kind: &'static str) -> Self {
        Record { kind, fields: Vec::new() }
    }

    fn with(mut self, key: &'static str, value: Field) -> Self {
        self.fields.push((key, value));
        self
    }
}

struct Emitter<'w> {
    out: &'w mut dyn Write,
    format: Format,
    msd: bool,
    csv_kind: Option<&'static str>,
}

fn json_count(n: u128) -> Value {
    match u64::try_from(n) {
        Ok(n) => Value::from(n),
        Err(_) => Value::from(n.to_string()),
    }
}

impl Emitter<'_> {
    fn digits_text(&self, x: &DigitString) -> String {
        if self.msd {
            x.to_msd_string()
        } else {
            x.to_string()
        }
    }

    fn table_text(&self, field: &Field) -> String {
        match field {
            Field::Count(n) => n.to_string(),
            Field::Nat(n) => n.to_string(),
            Field::Text(s) => s.clone(),
            Field::Flag(b) => b.to_string(),
            Field::Rational(q) => format!("{} ({})", fraction(q), to_decimal(q)),
            Field::Digits(x) => self.digits_text(x),
            Field::Counts(xs) => format!("[{}]", xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
            Field::Missing => "-".to_string(),
        }
    }

    fn json(field: &Field) -> Value {
        match field {
            Field::Count(n) => json_count(*n),
            Field::Nat(n) => Value::from(n.to_string()),
            Field::Text(s) => Value::from(s.clone()),
            Field::Flag(b) => Value::from(*b),
            Field::Rational(q) => {
                let mut m = Map::new();
                m.insert("num".into(), Value::from(q.numer().to_string()));
                m.insert("den".into(), Value::from(q.denom().to_string()));
                m.insert("decimal".into(), Value::from(to_decimal(q)));
                Value::Object(m)
            }
            // always LSD first on the wire
            Field::Digits(x) => Value::from(x.digits().to_vec()),
            Field::Counts(xs) => Value::from(xs.clone()),
            Field::Missing => Value::Null,
        }
    }

    /// Header and cells; rationals split into `_num`, `_den` and `_decimal`
    /// columns, except in violation rows which follow the fixed
    /// `a,b,gap_num,gap_den,req_num,req_den` schema.
    fn csv_row(&self, record: &Record) -> (Vec<String>, Vec<String>) {
        let mut header = Vec::new();
        let mut cells = Vec::new();
        for (key, field) in &record.fields {
            match field {
                Field::Rational(q) => {
                    header.push(format!("{key}_num"));
                    cells.push(q.numer().to_string());
                    header.push(format!("{key}_den"));
                    cells.push(q.denom().to_string());
                    if record.kind != "violation" {
                        header.push(format!("{key}_decimal"));
                        cells.push(to_decimal(q));
                    }
                }
                Field::Digits(x) => {
                    header.push(key.to_string());
                    cells.push(x.to_string());
                }
                Field::Missing => {
                    header.push(key.to_string());
                    cells.push(String::new());
                }
                other => {
                    header.push(key.to_string());
                    cells.push(self.table_text(other));
                }
            }
        }
        (header, cells)
    }

    fn emit(&mut self, record: &Record) -> std::io::Result<()> {
        match self.format {
            Format::Table => {
                let line: Vec<String> = record
                    .fields
                    .iter()
                    .map(|(k, v)| format!("{k}={}", self.table_text(v)))
                    .collect();
                writeln!(self.out, "{}", line.join(" "))
            }
            Format::JsonLines => {
                let mut m = Map::new();
                m.insert("record".into(), Value::from(record.kind));
                for (k, v) in &record.fields {
                    m.insert(k.to_string(), Self::json(v));
                }
                writeln!(self.out, "{}", Value::Object(m))
            }
            Format::Csv => {
                let (header, cells) = self.csv_row(record);
                if self.csv_kind != Some(record.kind) {
                    self.csv_kind = Some(record.kind);
                    self.csv_line(&header)?;
                }
                self.csv_line(&cells)
            }
        }
    }

    fn csv_line(&mut self, cells: &[String]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(cells)?;
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.out.write_all(&bytes)
    }
}

fn fraction(q: &ExactRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let mut emitter = Emitter {
        out,
        format: cli.global.format,
        msd: cli.global.msd,
        csv_kind: None,
    };
    match dispatch(&cli, &mut emitter, err) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            match failure {
                Failure::Core(Error::ResourceBound { .. }) => EXIT_RESOURCE,
                Failure::Core(_) => EXIT_USAGE,
                Failure::Io(_) => EXIT_USAGE,
            }
        }
    }
}

fn workers(g: &GlobalOpts) -> usize {
    g.workers.unwrap_or_else(default_workers).max(1)
}

fn verify_options(g: &GlobalOpts) -> VerifyOptions {
    VerifyOptions {
        max_pairs: g.max_pairs,
        workers: workers(g),
    }
}

fn search_options(g: &GlobalOpts) -> SearchOptions {
    SearchOptions {
        max_points: g.max_points,
        workers: workers(g),
    }
}

fn parse_digits(text: &str, msd: bool) -> Result<DigitString> {
    if msd {
        let trimmed = text.trim().trim_start_matches('[').trim_end_matches(']');
        let mut x: DigitString = trimmed.parse()?;
        let mut digits = x.digits().to_vec();
        digits.reverse();
        x = DigitString::new(digits);
        Ok(x)
    } else {
        text.parse()
    }
}

/// `reciprocal`, `Q/n`, `constant:Q` or a bare `Q` (constant).
fn parse_constraint(text: &str) -> Result<ConstraintFunction> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("reciprocal") {
        return Ok(ConstraintFunction::reciprocal());
    }
    if let Some(scale) = t.strip_suffix("/n") {
        let scale = parse_rational(scale)?;
        return if scale == ExactRational::from_integer(1.into()) {
            Ok(ConstraintFunction::reciprocal())
        } else {
            ConstraintFunction::scaled_reciprocal(scale)
        };
    }
    let value = t.strip_prefix("constant:").unwrap_or(t);
    parse_rational(value)
        .and_then(ConstraintFunction::constant)
        .map_err(|_| Error::Config(format!("`{text}` is not a constraint (expected reciprocal, Q/n, constant:Q or Q)")))
}

fn relation_name(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

fn position(v: &OrderingVerdict) -> Field {
    v.witness_position.map_or(Field::Missing, |p| Field::Count(p as u128))
}

fn dispatch(cli: &Cli, em: &mut Emitter<'_>, err: &mut dyn Write) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Fib { from, to } => {
            for n in *from..=to.unwrap_or(*from) {
                em.emit(&Record::new("fib").with("n", Field::Count(n as u128)).with("value", Field::Nat(fib(n))))?;
            }
        }
        Command::Basis { from, to, system } => {
            let s = load_system(system)?;
            for i in *from..=to.unwrap_or(*from) {
                em.emit(
                    &Record::new("basis")
                        .with("system", Field::Text(s.name().to_string()))
                        .with("i", Field::Count(i as u128))
                        .with("u", Field::Nat(s.term(i)?)),
                )?;
            }
        }
        Command::Encode { values, system } => {
            let s = load_system(system)?;
            for n in values {
                let x = encode(n, &s)?;
                em.emit(
                    &Record::new("encoding")
                        .with("n", Field::Nat(n.clone()))
                        .with("length", Field::Count(x.len() as u128))
                        .with("digits", Field::Digits(x)),
                )?;
            }
        }
        Command::Decode { digits, system } => {
            let s = load_system(system)?;
            let x = parse_digits(digits, g.msd)?;
            let value = decode(&x, &s)?;
            em.emit(&Record::new("decoding").with("digits", Field::Digits(x)).with("value", Field::Nat(value)))?;
        }
        Command::Validate { digits, system } => {
            let s = load_system(system)?;
            let x = parse_digits(digits, g.msd)?;
            let prefix = is_valid_fraenkel(&x, &s)?;
            let mut rec = Record::new("validity")
                .with("digits", Field::Digits(x.clone()))
                .with("prefix_sum", Field::Flag(prefix));
            if s.name() == "fib-even" {
                let factor = is_valid_fib(&x);
                let two_fold = fib_two_fold(&x);
                rec = rec
                    .with("forbidden_factor", Field::Flag(factor))
                    .with("two_fold", Field::Flag(two_fold))
                    .with("agree", Field::Flag(factor == prefix && prefix == two_fold));
            }
            em.emit(&rec)?;
        }
        Command::Enumerate { len } => {
            let fib_even = NumerationSystem::fib_even();
            for x in enumerate_valid(*len, ValidityRule::Fib, g.max_enum_len)? {
                let value = decode(&x, &fib_even)?;
                em.emit(&Record::new("string").with("value", Field::Nat(value)).with("digits", Field::Digits(x)))?;
            }
        }
        Command::EvalF { values } => {
            let fib_even = NumerationSystem::fib_even();
            for a in values {
                let x = encode(a, &fib_even)?;
                let f = f_of_digits(&x);
                em.emit(
                    &Record::new("f")
                        .with("a", Field::Nat(a.clone()))
                        .with("digits", Field::Digits(x))
                        .with("f", Field::Rational(f)),
                )?;
            }
        }
        Command::Compare { a, b } => {
            let by_value = compare_by_value(a, b);
            let by_f = compare_by_f(a, b);
            em.emit(
                &Record::new("comparison")
                    .with("a", Field::Nat(a.clone()))
                    .with("b", Field::Nat(b.clone()))
                    .with("by_value", Field::Text(relation_name(by_value.relation).into()))
                    .with("value_position", position(&by_value))
                    .with("by_f", Field::Text(relation_name(by_f.relation).into()))
                    .with("f_position", position(&by_f)),
            )?;
        }
        Command::Verify { max, constraint } => {
            let c = parse_constraint(constraint)?;
            let opts = verify_options(g);
            opts.check_pair_budget(*max)?;
            return stream_violations(em, err, None, |sink| verify_range_streaming(*max, &c, &opts, sink));
        }
        Command::CheckSystem {
            max,
            constraint,
            system,
        } => {
            let (s, configured) = load_system_and_constraint(system)?;
            let c = match constraint {
                Some(text) => parse_constraint(text)?,
                None => configured.unwrap_or_else(ConstraintFunction::reciprocal),
            };
            let opts = verify_options(g);
            opts.check_pair_budget(*max)?;
            let name = s.name().to_string();
            return stream_violations(em, err, Some(name), |sink| {
                check_system_streaming(&s, &c, *max, &opts, sink)
            });
        }
        Command::Sup { n, all } => {
            if *n == 0 {
                return Err(Error::Precondition("sup needs --n >= 1".into()).into());
            }
            let first = if *all { 1 } else { *n };
            for k in first..=*n {
                let (argmax, value) = max_f_up_to_length(k)?;
                debug_assert_eq!(value, supremum_partial(k)?);
                em.emit(
                    &Record::new("supremum")
                        .with("n", Field::Count(k as u128))
                        .with("argmax", Field::Nat(argmax))
                        .with("argmax_digits", Field::Digits(top_string(k)))
                        .with("value", Field::Rational(value))
                        .with("below_one_plus_phi", Field::Flag(partial_sum_below_golden_ratio(k)?)),
                )?;
            }
        }
        Command::Identities { max, kinds, show } => {
            let kinds: Vec<IdentityKind> = if kinds.is_empty() {
                IdentityKind::ALL.to_vec()
            } else {
                kinds.iter().map(|k| k.parse()).collect::<Result<_>>()?
            };
            let mut all_passed = true;
            for kind in kinds {
                let outcome = run_identity(kind, *max);
                all_passed &= outcome.passed();
                em.emit(
                    &Record::new("identity")
                        .with("kind", Field::Text(kind.name().into()))
                        .with("max", Field::Count(*max as u128))
                        .with("checked", Field::Count(outcome.checked as u128))
                        .with("failures", Field::Count(outcome.failures.len() as u128))
                        .with("equalities", Field::Count(outcome.equalities.len() as u128))
                        .with("passed", Field::Flag(outcome.passed())),
                )?;
                for v in outcome.failures.iter().take(*show) {
                    em.emit(
                        &Record::new("identity-failure")
                            .with("kind", Field::Text(kind.name().into()))
                            .with("params", Field::Counts(v.parameters.clone()))
                            .with("lhs", Field::Rational(v.lhs.clone()))
                            .with("rhs", Field::Rational(v.rhs.clone())),
                    )?;
                }
            }
            return Ok(if all_passed { EXIT_OK } else { EXIT_NEGATIVE });
        }
        Command::SearchOptimum {
            points,
            size,
            constraint,
        } => {
            let c = parse_constraint(constraint)?;
            let inst = match size {
                Some(m) => FiniteInstance::interval(*m, c)?,
                None => FiniteInstance::new(points.clone(), c)?,
            };
            let r = exact_optimum(&inst, &search_options(g))?;
            em.emit(
                &Record::new("optimum")
                    .with("points", Field::Counts(inst.points().to_vec()))
                    .with("constraint", Field::Text(inst.constraint().description().into()))
                    .with("optimum", Field::Rational(r.optimum.clone()))
                    .with("order", Field::Counts(r.order.clone()))
                    .with("orders_explored", Field::Count(r.orders_explored as u128)),
            )?;
            emit_witness(em, &r.witness)?;
        }
        Command::Conjecture { n } => {
            let r = compare_with_conjecture(*n, &search_options(g))?;
            em.emit(
                &Record::new("conjecture")
                    .with("n", Field::Count(*n as u128))
                    .with("points", Field::Count(r.points.len() as u128))
                    .with("optimum", Field::Rational(r.optimum.optimum.clone()))
                    .with("conjectured", Field::Rational(r.conjectured.clone()))
                    .with("f_max", Field::Rational(r.f_max_up_to_length.1.clone()))
                    .with("f_argmax", Field::Nat(r.f_max_up_to_length.0.clone()))
                    .with("f_max_on_points", Field::Rational(r.f_max_on_points.1.clone()))
                    .with("f_argmax_on_points", Field::Count(r.f_max_on_points.0 as u128))
                    .with(
                        "optimum_vs_conjectured",
                        Field::Text(relation_name(r.optimum_vs_conjectured).into()),
                    )
                    .with(
                        "optimum_below_conjectured",
                        Field::Flag(r.optimum_vs_conjectured == Ordering::Less),
                    )
                    .with("f_max_vs_conjectured", Field::Text(relation_name(r.f_max_vs_conjectured).into()))
                    .with("order", Field::Counts(r.optimum.order.clone()))
                    .with("orders_explored", Field::Count(r.optimum.orders_explored as u128)),
            )?;
            emit_witness(em, &r.optimum.witness)?;
        }
    }
    Ok(EXIT_OK)
}

fn emit_witness(em: &mut Emitter<'_>, witness: &crate::optimum_search::Assignment) -> std::io::Result<()> {
    for (p, v) in witness {
        em.emit(
            &Record::new("witness")
                .with("point", Field::Count(*p as u128))
                .with("value", Field::Rational(v.clone())),
        )?;
    }
    Ok(())
}

fn violation_record(v: &Violation) -> Record {
    Record::new("violation")
        .with("a", Field::Count(v.a as u128))
        .with("b", Field::Count(v.b as u128))
        .with("gap", Field::Rational(v.gap.clone()))
        .with("req", Field::Rational(v.required.clone()))
}

/// Streams violations as `check` finds them, then the summary. In CSV mode
/// stdout carries only the violation table and the summary goes to `err`.
fn stream_violations(
    em: &mut Emitter<'_>,
    err: &mut dyn Write,
    system: Option<String>,
    check: impl FnOnce(&mut dyn FnMut(&Violation)) -> Result<ViolationReport>,
) -> Outcome {
    let csv = em.format == Format::Csv;
    if csv {
        em.csv_kind = Some("violation");
        em.csv_line(&["a", "b", "gap_num", "gap_den", "req_num", "req_den"].map(String::from))?;
    }
    let mut io_error = None;
    let report = check(&mut |v: &Violation| {
        if io_error.is_none() {
            if let Err(e) = em.emit(&violation_record(v)) {
                io_error = Some(e);
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let mut summary = Record::new("summary")
        .with("pairs", Field::Count(report.pairs_checked))
        .with("violations", Field::Count(report.violations.len() as u128));
    if let Some(name) = system {
        summary = summary.with("system", Field::Text(name));
    }
    summary = summary
        .with("max", Field::Count(report.range_checked.1 as u128))
        .with("constraint", Field::Text(report.constraint.clone()));
    if csv {
        let mut side = Emitter {
            out: err,
            format: Format::Table,
            msd: false,
            csv_kind: None,
        };
        side.emit(&summary)?;
    } else {
        em.emit(&summary)?;
    }
    Ok(if report.is_clean() { EXIT_OK } else { EXIT_NEGATIVE })
}

/// A number written either as a TOML integer or as a string (for values
/// beyond 64 bits or rationals).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumberText {
    Int(i64),
    Text(String),
}

impl NumberText {
    fn text(&self) -> String {
        match self {
            NumberText::Int(n) => n.to_string(),
            NumberText::Text(s) => s.trim().to_string(),
        }
    }

    fn natural(&self, what: &str) -> Result<Natural> {
        self.text()
            .parse()
            .map_err(|_| Error::Config(format!("{what}: `{}` is not a non-negative integer", self.text())))
    }

    fn integer(&self, what: &str) -> Result<BigInt> {
        self.text()
            .parse()
            .map_err(|_| Error::Config(format!("{what}: `{}` is not an integer", self.text())))
    }

    fn rational(&self) -> Result<ExactRational> {
        parse_rational(&self.text())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDocument {
    format: u32,
    name: Option<String>,
    basis: Option<Vec<NumberText>>,
    recurrence: Option<RecurrenceConfig>,
    constraint: Option<ConstraintConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecurrenceConfig {
    coefficients: Vec<NumberText>,
    initial_values: Vec<NumberText>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ConstraintConfig {
    Reciprocal { scale: Option<NumberText> },
    Constant { value: NumberText },
    Table { values: Vec<NumberText>, tail: NumberText },
}

fn read_config(path: &Path) -> Result<ConfigDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
    let doc: ConfigDocument =
        toml::from_str(&text).map_err(|e| Error::Config(format!("`{}`: {}", path.display(), e.message())))?;
    if doc.format != 1 {
        return Err(Error::Config(format!(
            "`{}`: unsupported format {} (expected 1)",
            path.display(),
            doc.format
        )));
    }
    Ok(doc)
}

fn system_from_config(doc: &ConfigDocument, path: &Path) -> Result<NumerationSystem> {
    let name = doc.name.clone().unwrap_or_else(|| "custom".into());
    match (&doc.basis, &doc.recurrence) {
        (Some(basis), None) => {
            let terms = basis.iter().map(|u| u.natural("basis")).collect::<Result<_>>()?;
            NumerationSystem::explicit(name, terms)
        }
        (None, Some(rec)) => {
            let coefficients = rec
                .coefficients
                .iter()
                .map(|c| c.integer("recurrence.coefficients"))
                .collect::<Result<_>>()?;
            let initial = rec
                .initial_values
                .iter()
                .map(|u| u.natural("recurrence.initial_values"))
                .collect::<Result<_>>()?;
            NumerationSystem::linear_recurrence(name, coefficients, initial)
        }
        _ => Err(Error::Config(format!(
            "`{}`: declare exactly one of `basis` or `recurrence`",
            path.display()
        ))),
    }
}

fn constraint_from_config(c: &ConstraintConfig) -> Result<ConstraintFunction> {
    match c {
        ConstraintConfig::Reciprocal { scale: None } => Ok(ConstraintFunction::reciprocal()),
        ConstraintConfig::Reciprocal { scale: Some(q) } => ConstraintFunction::scaled_reciprocal(q.rational()?),
        ConstraintConfig::Constant { value } => ConstraintFunction::constant(value.rational()?),
        ConstraintConfig::Table { values, tail } => ConstraintFunction::table(
            values.iter().map(NumberText::rational).collect::<Result<_>>()?,
            tail.rational()?,
        ),
    }
}

fn builtin_system(name: &str) -> Result<NumerationSystem> {
    match name {
        "fib-even" => Ok(NumerationSystem::fib_even()),
        "binary" => Ok(NumerationSystem::binary()),
        other => Err(Error::Config(format!(
            "unknown system `{other}` (expected fib-even or binary, or pass --config)"
        ))),
    }
}

fn load_system(opts: &SystemOpts) -> Result<NumerationSystem> {
    load_system_and_constraint(opts).map(|(s, _)| s)
}

fn load_system_and_constraint(opts: &SystemOpts) -> Result<(NumerationSystem, Option<ConstraintFunction>)> {
    match &opts.config {
        None => Ok((builtin_system(&opts.system)?, None)),
        Some(path) => {
            let doc = read_config(path)?;
            let system = system_from_config(&doc, path)?;
            let constraint = doc.constraint.as_ref().map(constraint_from_config).transpose()?;
            Ok((system, constraint))
        }
    }
}
