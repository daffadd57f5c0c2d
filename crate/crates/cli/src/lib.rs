//! Command-line front end: argument types, dispatch and JSON rendering.

pub mod sweep;

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use zipchow_core::azip::{self, CyclicSubset, HilbertOracle, StrataExpansion};
use zipchow_core::chevalley::{self, ConeQuery};
use zipchow_core::expr::parse_scalar;
use zipchow_core::strata::{self, curves::substitute, DiagramFixture};
use zipchow_core::weyl::RootDatum;
use zipchow_core::{Error, Rational, ScalarP};

pub const SCHEMA: &str = "zipchow/1";
pub const MAX_D_VAR: &str = "ZIPCHOW_MAX_D";
pub const DEFAULT_MAX_D: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "zipchow", version, about = "Strata-effectivity computations in Chow rings of G-Zip stacks")]
pub struct Cli {
    /// Output format of the data stream.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand a Hodge monomial L_I in the strata classes of the Hilbert flag space.
    Expand(ExpandArgs),
    /// Cross-check the closed form against the oracle for every subset of Z/d.
    Certify(CertifyArgs),
    /// Partial Hasse cone membership.
    Cone(ConeArgs),
    /// Stratification profile of a parabolic.
    Classify(ClassifyArgs),
    /// Verify or render a stratum diagram.
    Diagram(DiagramArgs),
    /// Batch checks over ranges.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Gauss,
    Oracle,
    Kunneth,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub d: usize,
    /// Members of I, e.g. `1,3`.
    #[arg(long, allow_hyphen_values = true)]
    pub set: String,
    #[arg(long, value_enum, default_value = "closed")]
    pub method: Method,
    /// Frobenius orbit sizes for `--method kunneth`, e.g. `2,3`.
    #[arg(long, value_delimiter = ',')]
    pub blocks: Vec<usize>,
    /// Evaluate the coefficients at this prime.
    #[arg(long)]
    pub at_p: Option<String>,
    /// Exit 1 unless every coefficient is nonnegative.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<i64>,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// The inert Hilbert threefold test on a triple of weights.
    #[arg(long)]
    pub hilbert_inert: bool,
    /// Weights for `--hilbert-inert`, e.g. `p^3-1,p^2,p^3-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// `symbolic` or a prime.
    #[arg(long, default_value = "symbolic")]
    pub p: String,
    /// Root datum such as `C2`, `A2u` or `A1^3`.
    #[arg(long = "type")]
    pub cartan: Option<String>,
    /// Weyl element as a word such as `s1s2`, or `w0`.
    #[arg(long)]
    pub w: Option<String>,
    /// Stratum label of A1^d, a subset of Z/d such as `1,2`.
    #[arg(long)]
    pub stratum: Option<String>,
    /// Character coordinates, e.g. `1,-p`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Read `--lambda` as Hodge weights.
    #[arg(long)]
    pub hodge: bool,
    /// Simple roots of the Levi, e.g. `1,2`.
    #[arg(long, default_value = "")]
    pub levi: String,
    /// Exit 1 when the character is not in the cone.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Root datum such as `C3`, `F4` or `G2`.
    #[arg(long = "type")]
    pub cartan: String,
    #[arg(long, default_value = "")]
    pub levi: String,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Built-in name (`c2`, `a2_unitary`, `a2_split`) or a path to a JSON fixture.
    #[arg(long)]
    pub fixture: String,
    /// Exit 1 if any check fails.
    #[arg(long)]
    pub check: bool,
    /// Print Graphviz instead of the report.
    #[arg(long)]
    pub emit_dot: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: sweep::SweepKind,
    /// Upper bound on d (or n for proportionality).
    #[arg(long)]
    pub max_d: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<i64>,
    /// Random samples per prime for the curve sweep.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Outcome of a command: a document for the data stream and an exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub body: Output,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Json(Value),
    Raw(String),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn max_d() -> usize {
    std::env::var(MAX_D_VAR).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_MAX_D)
}

fn check_d(d: usize) -> CliResult<()> {
    let cap = max_d();
    if d > cap {
        return Err(Error::ResourceBound(format!("d = {d} exceeds {MAX_D_VAR} = {cap}")).into());
    }
    if d == 0 {
        return Err(usage("d must be positive"));
    }
    Ok(())
}

fn is_prime(n: i64) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

/// `symbolic` or a prime.
pub fn parse_p(s: &str) -> CliResult<ScalarP> {
    if s.eq_ignore_ascii_case("symbolic") || s == "p" {
        return Ok(ScalarP::p());
    }
    match s.parse::<i64>() {
        Ok(n) if is_prime(n) => Ok(ScalarP::from_int(n)),
        _ => Err(usage(format!("p must be `symbolic` or a prime, got `{s}`"))),
    }
}

fn parse_prime(s: &str) -> CliResult<i64> {
    parse_p(s)?
        .as_constant()
        .and_then(|q| q.to_integer().try_into().ok())
        .ok_or_else(|| usage("expected a numeric prime"))
}

fn parse_list(s: &str) -> CliResult<Vec<ScalarP>> {
    s.split(',').map(|t| parse_scalar(t.trim()).map_err(|e| usage(format!("bad value `{t}`: {e}")))).collect()
}

fn parse_indices(s: &str) -> CliResult<Vec<usize>> {
    let s = s.trim().trim_start_matches('{').trim_end_matches('}');
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| usage(format!("bad index `{t}`")))).collect()
}

fn datum_levi(datum: &RootDatum, levi: &str) -> CliResult<Vec<usize>> {
    parse_indices(levi)?
        .into_iter()
        .map(|i| {
            i.checked_sub(datum.index_base)
                .filter(|&k| k < datum.rank())
                .ok_or_else(|| usage(format!("simple root {i} out of range")))
        })
        .collect()
}

pub fn scalar_json(c: &ScalarP) -> Value {
    json!({ "num": c.num_string(), "den": c.den_string(), "value": c.to_string() })
}

fn rational_string(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m
}

/// JSON for an expansion, optionally evaluated at a prime.
pub fn expansion_json(e: &StrataExpansion, at_p: Option<i64>) -> CliResult<Value> {
    let mut out = header("expand");
    out.insert("d".into(), json!(e.source.d()));
    out.insert("I".into(), json!(e.source.members()));
    if e.blocks.len() > 1 {
        out.insert("blocks".into(), json!(e.blocks));
    }
    let mut terms = Vec::new();
    for (j, c) in &e.coefficients {
        let mut t = Map::new();
        t.insert("J".into(), json!(j.members()));
        match at_p {
            None => {
                t.insert("num".into(), json!(c.num_string()));
                t.insert("den".into(), json!(c.den_string()));
                t.insert("coefficient".into(), json!(c.to_string()));
            }
            Some(p) => {
                let v = c.eval_int(p).ok_or(Error::DivisionByZero)?;
                t.insert("num".into(), json!(v.numer().to_string()));
                t.insert("den".into(), json!(v.denom().to_string()));
                t.insert("coefficient".into(), json!(rational_string(&v)));
            }
        }
        terms.push(Value::Object(t));
    }
    if let Some(p) = at_p {
        out.insert("p".into(), json!(p));
    }
    out.insert("terms".into(), Value::Array(terms));
    out.insert("effective".into(), json!(e.is_effective()));
    Ok(Value::Object(out))
}

fn expand(a: &ExpandArgs) -> CliResult<Outcome> {
    check_d(a.d)?;
    let i = CyclicSubset::parse(a.d, &a.set)?;
    let e = match a.method {
        Method::Closed => azip::expand_closed(&i)?,
        Method::Gauss => azip::expand_gauss(&i)?,
        Method::Oracle => HilbertOracle::new(a.d)?.expand(&i)?,
        Method::Kunneth => {
            if a.blocks.iter().sum::<usize>() != a.d {
                return Err(usage("--blocks must sum to d"));
            }
            azip::kunneth_expand(&a.blocks, &i)?
        }
    };
    let at_p = a.at_p.as_deref().map(parse_prime).transpose()?;
    let effective = e.is_effective();
    Ok(Outcome { code: if a.assert && !effective { 1 } else { 0 }, body: Output::Json(expansion_json(&e, at_p)?) })
}

fn certify(a: &CertifyArgs) -> CliResult<Outcome> {
    check_d(a.d)?;
    for &p in &a.primes {
        if !is_prime(p) {
            return Err(usage(format!("{p} is not a prime")));
        }
    }
    let r = sweep::certify_d(a.d, &a.primes)?;
    let ok = r.passed();
    let mut out = header("certify");
    if let Value::Object(m) = r.to_json() {
        out.extend(m);
    }
    Ok(Outcome { code: if ok { 0 } else { 1 }, body: Output::Json(Value::Object(out)) })
}

fn cone(a: &ConeArgs) -> CliResult<Outcome> {
    let p = parse_p(&a.p)?;
    let mut out = header("cone");
    out.insert("p".into(), json!(a.p));
    let contains;
    if a.hilbert_inert {
        let k = a.k.as_deref().ok_or_else(|| usage("--hilbert-inert needs --k"))?;
        let k = parse_list(k)?.iter().map(|x| substitute(x, &p)).collect::<Result<Vec<_>, _>>()?;
        let r = chevalley::hilbert_inert_cone(&k, &p)?;
        out.insert("k".into(), json!(k.iter().map(ToString::to_string).collect::<Vec<_>>()));
        out.insert("m".into(), json!(r.m.iter().map(ToString::to_string).collect::<Vec<_>>()));
        out.insert("in_pha".into(), json!(r.in_pha));
        out.insert("ample".into(), json!(r.ample));
        contains = r.in_pha;
    } else {
        let cartan = a.cartan.as_deref().ok_or_else(|| usage("--type is required"))?;
        let datum = RootDatum::parse(cartan)?;
        let w = match (&a.w, &a.stratum) {
            (Some(w), None) => datum.parse_element(w)?,
            (None, Some(s)) => chevalley::hilbert_stratum_element(&datum, &CyclicSubset::parse(datum.rank(), s)?)?,
            _ => return Err(usage("give exactly one of --w and --stratum")),
        };
        let lambda = a.lambda.as_deref().ok_or_else(|| usage("--lambda is required"))?;
        let mut lambda = parse_list(lambda)?.iter().map(|x| substitute(x, &p)).collect::<Result<Vec<_>, _>>()?;
        if a.hodge {
            lambda = chevalley::from_hodge(&lambda);
        }
        let mut q = ConeQuery::new(w.clone(), lambda, p.clone());
        q.levi = datum_levi(&datum, &a.levi)?;
        let v = chevalley::pha_cone_contains(&datum, &q)?;
        out.insert("type".into(), json!(cartan));
        out.insert("w".into(), json!(datum.word_string(&w)));
        out.insert("contains".into(), json!(v.contains));
        out.insert("witness".into(), json!(v.witness.iter().map(ToString::to_string).collect::<Vec<_>>()));
        let terms: Vec<Value> = v
            .divisor
            .terms
            .iter()
            .map(|t| {
                json!({
                    "root": t.root.vector,
                    "target": datum.word_string(&t.target),
                    "coefficient": t.coefficient.to_string(),
                })
            })
            .collect();
        out.insert("divisor".into(), Value::Array(terms));
        contains = v.contains;
    }
    Ok(Outcome { code: if a.assert && !contains { 1 } else { 0 }, body: Output::Json(Value::Object(out)) })
}

fn classify(a: &ClassifyArgs) -> CliResult<Outcome> {
    let datum = RootDatum::parse(&a.cartan)?;
    let levi = datum_levi(&datum, &a.levi)?;
    let profile = datum.strat_type(&levi)?;
    let mut out = header("classify");
    out.insert("type".into(), json!(a.cartan));
    out.insert("levi".into(), json!(parse_indices(&a.levi)?));
    out.insert("linear".into(), json!(profile.iter().all(|&m| m == 1)));
    out.insert("profile".into(), json!(profile));
    Ok(Outcome { code: 0, body: Output::Json(Value::Object(out)) })
}

pub fn load_fixture(name: &str) -> CliResult<DiagramFixture> {
    if Path::new(name).is_file() {
        let s = std::fs::read_to_string(name).map_err(|e| usage(format!("{name}: {e}")))?;
        return Ok(DiagramFixture::from_json(&s)?);
    }
    Ok(DiagramFixture::builtin(name)?)
}

fn diagram(a: &DiagramArgs) -> CliResult<Outcome> {
    let f = load_fixture(&a.fixture)?;
    if a.emit_dot {
        return Ok(Outcome { code: 0, body: Output::Raw(f.to_dot()) });
    }
    let r = strata::verify_diagram(&f)?;
    let mut out = header("diagram");
    out.insert("name".into(), json!(r.name));
    out.insert("passed".into(), json!(r.passed()));
    out.insert("checks".into(), json!(r.checks.len()));
    out.insert("failures".into(), serde_json::to_value(r.failures()).map_err(Error::from)?);
    let code = if a.check && !r.passed() { 1 } else { 0 };
    Ok(Outcome { code, body: Output::Json(Value::Object(out)) })
}

fn run_sweep(a: &SweepArgs) -> CliResult<Outcome> {
    if let Some(d) = a.max_d {
        check_d(d)?;
    }
    for &p in &a.primes {
        if !is_prime(p) {
            return Err(usage(format!("{p} is not a prime")));
        }
    }
    let opts = sweep::SweepOptions { max_d: a.max_d, primes: a.primes.clone(), samples: a.samples, seed: a.seed };
    let r = sweep::run(a.kind, &opts)?;
    let mut out = header("sweep");
    if let Value::Object(m) = r.to_json() {
        out.extend(m);
    }
    Ok(Outcome { code: if r.passed() { 0 } else { 1 }, body: Output::Json(Value::Object(out)) })
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Expand(a) => expand(a),
        Command::Certify(a) => certify(a),
        Command::Cone(a) => cone(a),
        Command::Classify(a) => classify(a),
        Command::Diagram(a) => diagram(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn text(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text(x, indent + 2, out);
                    }
                    Value::Array(items) if items.iter().any(|i| i.is_object()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for i in items {
                            out.push_str(&format!("{pad}  - {}\n", compact(i)));
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", compact(x))),
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", compact(v))),
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(m) => m.iter().map(|(k, x)| format!("{k}={}", compact(x))).collect::<Vec<_>>().join(" "),
        _ => v.to_string(),
    }
}

pub fn render(body: &Output, format: Format) -> String {
    match body {
        Output::Raw(s) => s.clone(),
        Output::Json(v) => match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(v).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = String::new();
                text(v, 0, &mut s);
                s
            }
        },
    }
}

/// Parse, execute and print; returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let _ = stdout.write_all(render(&o.body, cli.format).as_bytes());
            o.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
