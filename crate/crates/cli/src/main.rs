mod output;
mod parse;

use std::io::{self, BufWriter};
use std::process::ExitCode;

use abelsurf_core::bounds::{prop31_bound_check, thm1_threshold, thm1_threshold_reached};
use abelsurf_core::equidist::{
    density_experiment, erdos_turan_check, harmonic_weyl_sum, BoxSample, TBox,
};
use abelsurf_core::intarith::is_prime_power;
use abelsurf_core::occurrence::{find_witnesses, GroupShape};
use abelsurf_core::verify::{self, SuiteReport};
use abelsurf_core::weil::{detect_exceptional, enumerate_isogeny_classes, xing_groups, ClassKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};

use output::{float, int, Emitter, Format};

/// Surfaces over finite fields: isogeny classes, group occurrence and
/// equidistribution experiments.
#[derive(Debug, Parser)]
#[command(name = "abelsurf", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ABELSURF_JOBS")]
    jobs: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Accepted for compatibility; every bound is decided in exact arithmetic.
    #[arg(long, global = true, value_name = "BITS")]
    precision_cap: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Isogeny classes of simple surfaces over F_q.
    #[command(subcommand)]
    Isogeny(IsogenyCmd),
    /// Occurrence of a group Z/n1 x Z/n1n2 x Z/n1n2n3 x Z/n1n2n3n4.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Run a verification sweep; exits 1 on any failure.
    Verify(VerifyArgs),
    /// Equidistribution of {2 n3 sqrt(n2 n4)} over boxes.
    #[command(subcommand)]
    Equidist(EquidistCmd),
}

#[derive(Debug, Subcommand)]
enum IsogenyCmd {
    Enumerate {
        #[arg(long, value_parser = parse::positive_big)]
        q: BigInt,
    },
}

#[derive(Debug, Subcommand)]
enum GroupCmd {
    Check {
        #[arg(value_parser = parse::positive_big)]
        n1: BigInt,
        #[arg(value_parser = parse::positive_big)]
        n2: BigInt,
        #[arg(value_parser = parse::positive_big)]
        n3: BigInt,
        #[arg(value_parser = parse::positive_big)]
        n4: BigInt,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Equivalence,
    Cyclic,
    Thm1,
    WitnessCongruence,
    Prop31,
    Lemma41,
    Degenerate,
    ErdosTuran,
    Trend,
    WeylExact,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Largest q for `equivalence` and `cyclic`.
    #[arg(long, default_value = "27", value_parser = parse::positive_u64)]
    max_q: u64,
    /// Largest m for `lemma41`.
    #[arg(long, default_value = "10^6", value_parser = parse::positive_u64)]
    max_m: u64,
    /// Range of n2, n3, n4 for `thm1` and `prop31`.
    #[arg(long, default_value = "3", value_parser = parse::positive_u64)]
    n234_max: u64,
    /// How far past the threshold n1 goes in `thm1` and `prop31`.
    #[arg(long, default_value = "5")]
    slack: u64,
    /// Largest group order for `witness-congruence` and `prop31`.
    #[arg(long, default_value = "2000", value_parser = parse::positive_u64)]
    max_order: u64,
    /// Sample count for `degenerate`.
    #[arg(long, default_value = "10^4", value_parser = parse::positive_u64)]
    samples: u64,
    /// Box count for `weyl-exact`.
    #[arg(long, default_value = "50", value_parser = parse::positive_u64)]
    boxes: u64,
    #[arg(long, default_value_t = 0x5eed_ab31)]
    seed: u64,
    /// Cube sides for `erdos-turan`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8", value_parser = parse::positive_u64)]
    sizes: Vec<u64>,
    /// Truncation orders for `erdos-turan`.
    #[arg(long = "ks", value_delimiter = ',', default_value = "1,5,20", value_parser = parse::positive_u64)]
    ks: Vec<u64>,
    /// Cube sides for `trend`.
    #[arg(long, value_delimiter = ',', default_value = "8,32,128", value_parser = parse::positive_u64)]
    ms: Vec<u64>,
    /// Largest discrepancy allowed at the final size in `trend`.
    #[arg(long, default_value = "1/5", value_parser = parse::rational)]
    tolerance: BigRational,
}

#[derive(Debug, Args)]
struct BoxArgs {
    #[arg(long = "N2", value_parser = parse::positive_u64)]
    n2: u64,
    #[arg(long = "N3", value_parser = parse::positive_u64)]
    n3: u64,
    #[arg(long = "N4", value_parser = parse::positive_u64)]
    n4: u64,
}

#[derive(Debug, Subcommand)]
enum EquidistCmd {
    /// Count in [alpha, beta] against the Erdős–Turán right-hand side.
    Zf {
        #[command(flatten)]
        tbox: BoxArgs,
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true)]
        alpha: BigRational,
        #[arg(long, value_parser = parse::rational, allow_hyphen_values = true)]
        beta: BigRational,
        #[arg(long = "K", default_value = "10", value_parser = parse::positive_u64)]
        big_k: u64,
    },
    /// Exponential sums E_k.
    Weyl {
        #[command(flatten)]
        tbox: BoxArgs,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        k: Vec<i64>,
    },
    /// sum_{k<=K} |E_k|/k against the two predictors.
    Harmonic {
        #[command(flatten)]
        tbox: BoxArgs,
        #[arg(long = "K", value_parser = parse::positive_u64)]
        big_k: u64,
    },
    /// Split of field-simple shapes by distance of 2 n3 sqrt(n2 n4) to an integer.
    Density {
        #[arg(long = "N1", value_parser = parse::positive_u64)]
        n1: u64,
        #[command(flatten)]
        tbox: BoxArgs,
        #[arg(long = "F", value_parser = parse::rational)]
        f: BigRational,
    },
}

/// Exit status beyond clap's own usage errors.
enum Failure {
    Input(String),
    Verification,
    Io(io::Error),
}

impl From<abelsurf_core::Error> for Failure {
    fn from(e: abelsurf_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Out<'a> = Emitter<BufWriter<io::StdoutLock<'a>>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("abelsurf: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let stdout = io::stdout();
    let mut out = Emitter::new(cli.format, BufWriter::new(stdout.lock()));
    let res = dispatch(cli.command, &mut out);
    let flushed = out.flush();
    match res.and(flushed.map_err(Failure::Io)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("abelsurf: {msg}");
            ExitCode::from(2)
        }
        // A closed pipe is not worth a diagnostic.
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("abelsurf: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command, out: &mut Out) -> Result<(), Failure> {
    match cmd {
        Command::Isogeny(IsogenyCmd::Enumerate { q }) => isogeny_enumerate(&q, out),
        Command::Group(GroupCmd::Check { n1, n2, n3, n4 }) => group_check([n1, n2, n3, n4], out),
        Command::Verify(args) => run_verify(&args, out),
        Command::Equidist(cmd) => equidist(cmd, out),
    }
}

fn record(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("record".into(), kind.into());
    m
}

fn shape_json(s: &GroupShape) -> Value {
    Value::Array(s.n().iter().map(int).collect())
}

fn isogeny_enumerate(q: &BigInt, out: &mut Out) -> Result<(), Failure> {
    let q = is_prime_power(q)?;
    for e in enumerate_isogeny_classes(&q) {
        let c = e.classification;
        let provenance = match c.kind() {
            ClassKind::FieldSimple => "field_simple",
            ClassKind::Rejected => "rejected",
            _ => "exceptional_candidate",
        };
        let groups = match detect_exceptional(&q, &e.a1, &e.a2) {
            Some(case) => Value::Array(xing_groups(case, &q)?.iter().map(shape_json).collect()),
            None => Value::Null,
        };
        let mut r = record("isogeny_class");
        r.insert("q".into(), int(q.q()));
        r.insert("a1".into(), int(&e.a1));
        r.insert("a2".into(), int(&e.a2));
        r.insert("kind".into(), c.kind().as_str().into());
        r.insert("f1".into(), int(&e.polynomial(&q).f_at_one()));
        r.insert("provenance".into(), provenance.into());
        r.insert("reject_reason".into(), c.reject_reason().map_or(Value::Null, |x| x.as_str().into()));
        r.insert("xing_groups".into(), groups);
        out.emit(&r)?;
    }
    Ok(())
}

fn group_check(n: [BigInt; 4], out: &mut Out) -> Result<(), Failure> {
    let shape = GroupShape::new(n)?;
    let search = find_witnesses(&shape)?;
    let witnesses: Vec<Value> = search
        .witnesses
        .iter()
        .map(|w| {
            json!({
                "q": int(w.q.q()),
                "a1": int(&w.a1),
                "a2": int(&w.a2),
                "provenance": "field_simple",
                "verdict_source": w.verdict_source.as_str(),
            })
        })
        .collect();
    let candidates: Vec<Value> = search
        .exceptional_candidates
        .iter()
        .map(|c| {
            json!({
                "q": int(c.q.q()),
                "a1": int(&c.a1),
                "a2": int(&c.a2),
                "provenance": "exceptional_candidate",
                "case": c.case.as_str(),
            })
        })
        .collect();
    let p31 = prop31_bound_check(&shape);
    let mut r = record("group_report");
    r.insert("shape".into(), shape_json(&shape));
    r.insert("order".into(), int(&shape.order()));
    r.insert("occurs".into(), (search.occurs_field_simple() || search.occurs_exceptional()).into());
    r.insert("occurs_field_simple".into(), search.occurs_field_simple().into());
    r.insert("occurs_exceptional_candidate".into(), search.occurs_exceptional().into());
    r.insert("witnesses".into(), witnesses.into());
    r.insert("exceptional_candidates".into(), candidates.into());
    r.insert("prop31".into(), json!({ "status": p31.status.as_str(), "precision_bits": p31.precision_bits }));
    r.insert(
        "thm1_threshold".into(),
        json!({
            "reached": thm1_threshold_reached(&shape),
            "n1_threshold": int(&thm1_threshold(shape.n2(), shape.n3(), shape.n4())),
        }),
    );
    out.emit(&r)?;
    Ok(())
}

fn run_verify(a: &VerifyArgs, out: &mut Out) -> Result<(), Failure> {
    let report = match a.suite {
        Suite::Equivalence => verify::equivalence(a.max_q)?,
        Suite::Cyclic => verify::cyclic(a.max_q)?,
        Suite::Thm1 => verify::thm1(a.n234_max, a.slack)?.0,
        Suite::WitnessCongruence => verify::witness_congruence(a.max_order)?.0,
        Suite::Prop31 => {
            let mut all = verify::thm1(a.n234_max, a.slack)?.1;
            all.extend(verify::witness_congruence(a.max_order)?.1);
            verify::prop31(&all)
        }
        Suite::Lemma41 => verify::lemma41(a.max_m),
        Suite::Degenerate => verify::degenerate(a.samples, a.seed)?,
        Suite::ErdosTuran => verify::erdos_turan(&a.sizes, &a.ks)?,
        Suite::Trend => verify::trend(&a.ms, &a.tolerance)?,
        Suite::WeylExact => verify::weyl_exact(a.boxes, a.seed)?,
    };
    emit_report(&report, out)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn emit_report(report: &SuiteReport, out: &mut Out) -> io::Result<()> {
    let mut r = record("verify_summary");
    r.insert("suite".into(), report.suite.into());
    r.insert("passed".into(), report.passed().into());
    r.insert("checked".into(), report.checked.into());
    r.insert("failure_count".into(), (report.failures.len() as u64).into());
    r.insert("failures".into(), report.failures.clone().into());
    out.emit(&r)
}

fn sample(b: &BoxArgs) -> Result<BoxSample, Failure> {
    Ok(BoxSample::new(TBox::new(b.n2, b.n3, b.n4)?)?)
}

fn box_fields(r: &mut Map<String, Value>, b: &BoxArgs) {
    r.insert("N2".into(), b.n2.into());
    r.insert("N3".into(), b.n3.into());
    r.insert("N4".into(), b.n4.into());
}

fn equidist(cmd: EquidistCmd, out: &mut Out) -> Result<(), Failure> {
    match cmd {
        EquidistCmd::Zf { tbox, alpha, beta, big_k } => {
            let s = sample(&tbox)?;
            let et = erdos_turan_check(&s, &alpha, &beta, big_k)?;
            let mut r = record("zf");
            box_fields(&mut r, &tbox);
            r.insert("alpha".into(), alpha.to_string().into());
            r.insert("beta".into(), beta.to_string().into());
            r.insert("K".into(), big_k.into());
            r.insert("z_count".into(), et.z_count.into());
            r.insert("cardinality".into(), et.cardinality.into());
            r.insert("lhs".into(), float(et.lhs));
            r.insert("rhs".into(), float(et.rhs));
            r.insert("slack".into(), float(et.slack));
            r.insert("holds".into(), et.holds.into());
            out.emit(&r)?;
            if !et.holds {
                return Err(Failure::Verification);
            }
        }
        EquidistCmd::Weyl { tbox, k } => {
            let s = sample(&tbox)?;
            for k in k {
                let e = s.weyl_sum(k);
                let mut r = record("weyl_sum");
                box_fields(&mut r, &tbox);
                r.insert("cardinality".into(), s.len().into());
                r.insert("k".into(), k.into());
                r.insert("re".into(), float(e.re));
                r.insert("im".into(), float(e.im));
                r.insert("value".into(), float(e.abs()));
                r.insert("abs_error_bound".into(), float(e.abs_error_bound));
                out.emit(&r)?;
            }
        }
        EquidistCmd::Harmonic { tbox, big_k } => {
            let s = sample(&tbox)?;
            let h = harmonic_weyl_sum(&s, big_k)?;
            let mut r = record("harmonic");
            box_fields(&mut r, &tbox);
            r.insert("cardinality".into(), s.len().into());
            r.insert("K".into(), h.big_k.into());
            r.insert("sum".into(), float(h.sum));
            r.insert("abs_error_bound".into(), float(h.abs_error_bound));
            r.insert("predictor_first".into(), float(h.predictor_first));
            r.insert("predictor_second".into(), float(h.predictor_second));
            out.emit(&r)?;
        }
        EquidistCmd::Density { n1, tbox, f } => {
            let d = density_experiment([n1, tbox.n2, tbox.n3, tbox.n4], &f)?;
            let mut r = record("density");
            r.insert("N1".into(), n1.into());
            box_fields(&mut r, &tbox);
            r.insert("F".into(), f.to_string().into());
            r.insert("total".into(), d.total.into());
            r.insert("s_count".into(), d.s_count.into());
            r.insert("s1_count".into(), d.s1_count.into());
            r.insert("s2_count".into(), d.s2_count.into());
            r.insert("f_bound_satisfied".into(), d.f_bound_satisfied.into());
            r.insert("consistent".into(), d.consistent.into());
            out.emit(&r)?;
            if !d.consistent {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}
