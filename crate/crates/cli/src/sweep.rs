//! Batch checks. Cases run in parallel; reports are sorted so output is stable.

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use zipchow_core::azip::{self, CyclicSubset, HilbertOracle, HilbertTables};
use zipchow_core::ring::RingPresentation;
use zipchow_core::strata::{self, CurveCriteria, DiagramFixture};
use zipchow_core::{Rational, Result, ScalarP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Reciprocity,
    Nonnegativity,
    Oracle,
    Orthogonality,
    Interval,
    Codim1,
    Proportionality,
    Diagrams,
    Curves,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub max_d: Option<usize>,
    pub primes: Vec<i64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { max_d: None, primes: vec![2, 3, 5, 7], samples: 10_000, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub kind: String,
    pub cases: usize,
    pub failures: Vec<String>,
    /// Extra findings that are not pass/fail.
    pub notes: Map<String, Value>,
}

impl SweepReport {
    fn new(kind: &str, cases: usize, mut failures: Vec<String>) -> Self {
        failures.sort();
        SweepReport { kind: kind.into(), cases, failures, notes: Map::new() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("sweep".into(), json!(self.kind));
        m.insert("cases".into(), json!(self.cases));
        m.insert("passed".into(), json!(self.cases - self.failures.len().min(self.cases)));
        m.insert("failed".into(), json!(self.failures.len()));
        m.insert("failures".into(), json!(self.failures.iter().take(50).collect::<Vec<_>>()));
        if !self.notes.is_empty() {
            m.insert("notes".into(), Value::Object(self.notes.clone()));
        }
        Value::Object(m)
    }
}

pub fn run(kind: SweepKind, o: &SweepOptions) -> Result<SweepReport> {
    let bound = |default: usize| o.max_d.unwrap_or(default);
    match kind {
        SweepKind::Reciprocity => reciprocity(bound(9)),
        SweepKind::Nonnegativity => nonnegativity(bound(10), &o.primes),
        SweepKind::Oracle => oracle(bound(10), &o.primes),
        SweepKind::Orthogonality => orthogonality(bound(8)),
        SweepKind::Interval => interval(bound(9)),
        SweepKind::Codim1 => codim_one(bound(8)),
        SweepKind::Proportionality => proportionality(bound(8)),
        SweepKind::Diagrams => diagrams(),
        SweepKind::Curves => curves(&o.primes, o.samples, o.seed),
    }
}

fn nonempty_subsets(d: usize) -> Vec<CyclicSubset> {
    (1..1u64 << d).map(|b| CyclicSubset::from_bits(d, b)).collect()
}

/// Equinumerous pairs `(I, J)` with `1 ≤ |I| ≤ d`.
fn pairs(d: usize) -> Vec<(CyclicSubset, CyclicSubset)> {
    (1..=d)
        .flat_map(|m| {
            let sets = CyclicSubset::all_of_size(d, m);
            sets.iter().flat_map(|i| sets.iter().map(move |j| (*i, *j))).collect::<Vec<_>>()
        })
        .collect()
}

fn collect_failures<T: Sync>(cases: &[T], f: impl Fn(&T) -> Result<Option<String>> + Sync + Send) -> Result<Vec<String>> {
    let out: Vec<Option<String>> = cases.par_iter().map(f).collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

pub fn reciprocity(max_d: usize) -> Result<SweepReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    let (mut d_sign_holds, mut d_sign_fails, mut d_sign_fails_with_even_gap) = (0usize, 0usize, 0usize);
    for d in 1..=max_d {
        let ps = pairs(d);
        cases += ps.len();
        let rs: Vec<(CyclicSubset, CyclicSubset, azip::Reciprocity)> =
            ps.par_iter().map(|(i, j)| Ok((*i, *j, azip::reciprocity(i, j)?))).collect::<Result<_>>()?;
        for (i, j, r) in rs {
            if !r.with_card_sign {
                failures.push(format!("d={d} I={i} J={j}"));
            }
            if r.with_d_sign {
                d_sign_holds += 1;
            } else {
                d_sign_fails += 1;
                if (d - i.len()) % 2 == 0 {
                    d_sign_fails_with_even_gap += 1;
                }
            }
        }
    }
    let mut r = SweepReport::new("reciprocity", cases, failures);
    r.notes.insert("d_sign_holds".into(), json!(d_sign_holds));
    r.notes.insert("d_sign_fails".into(), json!(d_sign_fails));
    r.notes.insert("d_sign_fails_with_even_gap".into(), json!(d_sign_fails_with_even_gap));
    Ok(r)
}

fn certificate_ok(c: &ScalarP, primes: &[i64]) -> bool {
    let monomial = c.monomial_numerator().is_some_and(|(_, k)| k > Rational::from_integer(0.into()));
    let den_positive = ScalarP::from_poly(c.denom().clone()).positive_certificate();
    let values = primes.iter().all(|&p| c.eval_int(p).is_some_and(|v| v >= Rational::from_integer(0.into())));
    monomial && den_positive && values
}

pub fn nonnegativity(max_d: usize, primes: &[i64]) -> Result<SweepReport> {
    let sets: Vec<CyclicSubset> = (1..=max_d).flat_map(nonempty_subsets).collect();
    let failures = collect_failures(&sets, |i| {
        let e = azip::expand_closed(i)?;
        let bad: Vec<String> =
            e.coefficients.iter().filter(|(_, c)| !certificate_ok(c, primes)).map(|(j, c)| format!("{j}: {c}")).collect();
        Ok((!bad.is_empty()).then(|| format!("d={} I={i}: {}", i.d(), bad.join(", "))))
    })?;
    Ok(SweepReport::new("nonnegativity", sets.len(), failures))
}

/// Closed form against the oracle for every nonempty `I ⊆ Z/d`, with the matrix diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CertifyReport {
    pub d: usize,
    pub subsets: usize,
    pub mismatches: Vec<String>,
    pub negative: Vec<String>,
    pub permutation_at_zero: bool,
    pub det_nonzero: bool,
}

impl CertifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.negative.is_empty() && self.permutation_at_zero && self.det_nonzero
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "subsets": self.subsets,
            "oracle_agrees": self.mismatches.is_empty(),
            "nonnegative": self.negative.is_empty(),
            "permutation_at_zero": self.permutation_at_zero,
            "det_nonzero": self.det_nonzero,
            "mismatches": self.mismatches,
            "negative": self.negative,
        })
    }
}

pub fn certify_d(d: usize, primes: &[i64]) -> Result<CertifyReport> {
    let oracle = HilbertOracle::new(d)?;
    let mut permutation_at_zero = true;
    let mut det_nonzero = true;
    for m in 1..=d {
        let a = oracle.matrix(m);
        permutation_at_zero &= a.is_signed_permutation_at_zero();
        det_nonzero &= primes.iter().all(|&p| a.det_nonzero_at(p));
    }
    let sets = nonempty_subsets(d);
    let checked: Vec<(Option<String>, Option<String>)> = sets
        .par_iter()
        .map(|i| {
            let closed = azip::expand_closed(i)?;
            let exact = oracle.expand(i)?;
            let mut mismatch = (closed != exact).then(|| format!("I={i}"));
            for &p in primes {
                if mismatch.is_none() && closed.at_p(p)? != exact.at_p(p)? {
                    mismatch = Some(format!("I={i} at p={p}"));
                }
            }
            let negative = e_negative(&closed, primes).then(|| format!("I={i}"));
            Ok((mismatch, negative))
        })
        .collect::<Result<_>>()?;
    let (mut mismatches, mut negative): (Vec<_>, Vec<_>) = (Vec::new(), Vec::new());
    for (m, n) in checked {
        mismatches.extend(m);
        negative.extend(n);
    }
    Ok(CertifyReport { d, subsets: sets.len(), mismatches, negative, permutation_at_zero, det_nonzero })
}

fn e_negative(e: &azip::StrataExpansion, primes: &[i64]) -> bool {
    e.coefficients.values().any(|c| !certificate_ok(c, primes))
}

pub fn oracle(max_d: usize, primes: &[i64]) -> Result<SweepReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for d in 1..=max_d {
        let r = certify_d(d, primes)?;
        cases += r.subsets;
        failures.extend(r.mismatches.iter().map(|m| format!("d={d} {m}")));
        failures.extend(r.negative.iter().map(|m| format!("d={d} negative {m}")));
        if !r.permutation_at_zero {
            failures.push(format!("d={d} A_m(0) is not a signed permutation"));
        }
        if !r.det_nonzero {
            failures.push(format!("d={d} det A_m vanishes at a test prime"));
        }
    }
    Ok(SweepReport::new("oracle", cases, failures))
}

pub fn orthogonality(max_d: usize) -> Result<SweepReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for d in 1..=max_d {
        let t = HilbertTables::new(d)?;
        let ps = pairs(d);
        cases += ps.len();
        failures.extend(collect_failures(&ps, |(i, j)| Ok((!t.orthogonality(i, j)?).then(|| format!("d={d} I={i} J={j}"))))?);
    }
    Ok(SweepReport::new("orthogonality", cases, failures))
}

pub fn interval(max_d: usize) -> Result<SweepReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for d in 1..=max_d {
        let t = HilbertTables::new(d)?;
        let iv: Vec<(usize, usize)> = (0..d).flat_map(|a| (1..=d).map(move |l| (a, l))).collect();
        cases += iv.len();
        failures.extend(collect_failures(&iv, |&(a, l)| Ok((!t.interval_identity(a, l)?).then(|| format!("d={d} a={a} len={l}"))))?);
    }
    Ok(SweepReport::new("interval", cases, failures))
}

pub fn codim_one(max_d: usize) -> Result<SweepReport> {
    let cases: Vec<(usize, usize)> = (1..=max_d).flat_map(|d| (0..d).map(move |i| (d, i))).collect();
    let failures = collect_failures(&cases, |&(d, i)| {
        let formula = azip::codim_one_expansion(d, i)?;
        let single = CyclicSubset::new(d, &[i])?;
        let ok = formula == azip::expand_closed(&single)? && formula.substitute()? == azip::monomial_l(&single);
        Ok((!ok).then(|| format!("d={d} i={i}")))
    })?;
    Ok(SweepReport::new("codim1", cases.len(), failures))
}

pub fn proportionality(max_n: usize) -> Result<SweepReport> {
    let cases: Vec<(usize, usize)> = (2..=max_n).flat_map(|n| (1..n).map(move |r| (n, r))).collect();
    let failures = collect_failures(&cases, |&(n, r)| {
        Ok((!strata::proportionality_type_a(n, r)?.holds()).then(|| format!("n={n} r={r}")))
    })?;
    Ok(SweepReport::new("proportionality", cases.len(), failures))
}

pub fn diagrams() -> Result<SweepReport> {
    let mut failures = Vec::new();
    for name in strata::BUILTIN_FIXTURES {
        let r = strata::verify_diagram(&DiagramFixture::builtin(name)?)?;
        for c in r.failures() {
            failures.push(format!("{name}: {} {} {}", c.kind, c.subject, c.detail.clone().unwrap_or_default()));
        }
        if RingPresentation::by_name(&DiagramFixture::builtin(name)?.ring).is_err() {
            failures.push(format!("{name}: unknown ring"));
        }
    }
    let mut r = SweepReport::new("diagrams", strata::BUILTIN_FIXTURES.len(), failures);
    r.notes.insert("fixtures".into(), json!(strata::BUILTIN_FIXTURES));
    Ok(r)
}

/// Random rationals with numerators in `[-1000, 1000]` and denominators in `[1, 100]`.
pub fn random_pairs(samples: usize, seed: u64) -> Vec<(Rational, Rational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = || Rational::new(rng.gen_range(-1000i64..=1000).into(), rng.gen_range(1i64..=100).into());
    (0..samples).map(|_| (q(), q())).collect()
}

/// C2: ordinary ⇒ strata-effective. Unitary A2: the witness `(p, −1)` is ordinary and
/// not effective, and ordinary plus `b ≥ 0` ⇒ effective.
pub fn curves(primes: &[i64], samples: usize, seed: u64) -> Result<SweepReport> {
    let c2 = CurveCriteria::c2()?;
    let a2 = CurveCriteria::a2_unitary()?;
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut ordinary_hits = 0usize;
    for &p in primes {
        let ps = ScalarP::from_int(p);
        let c2p = c2.at(&ps)?;
        let a2p = a2.at(&ps)?;
        let sample = random_pairs(samples, seed ^ (p as u64).wrapping_mul(0x9e37_79b9));
        let found: Vec<(bool, Option<String>)> = sample
            .par_iter()
            .map(|(a, b)| {
                let x = [ScalarP::from_rational_value(a.clone()), ScalarP::from_rational_value(b.clone())];
                let v = c2p.verdict(&x)?;
                let mut bad = (!v.implication_holds()).then(|| format!("C2 p={p} a={a} b={b}"));
                let u = a2p.verdict(&x)?;
                let b_nonneg = *b >= Rational::from_integer(0.into());
                if u.ordinary && b_nonneg && !u.strata_effective {
                    bad = Some(format!("A2u p={p} a={a} b={b}"));
                }
                Ok((v.ordinary, bad))
            })
            .collect::<Result<_>>()?;
        cases += found.len();
        for (ord, bad) in found {
            ordinary_hits += ord as usize;
            failures.extend(bad);
        }
        let w = a2p.verdict(&[ps.clone(), ScalarP::from_int(-1)])?;
        cases += 1;
        if !(w.ordinary && !w.strata_effective) {
            failures.push(format!("A2u witness (p,-1) at p={p} is not a counterexample"));
        }
    }
    let mut r = SweepReport::new("curves", cases, failures);
    r.notes.insert("c2_ordinary_samples".into(), json!(ordinary_hits));
    Ok(r)
}
