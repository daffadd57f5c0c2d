//! Acceptance suite: one PASS/FAIL line per criterion, exit status nonzero on any FAIL.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use num_traits::One;
use serde_json::Value;

use zipchow::sweep::{self, SweepReport};
use zipchow_core::azip::{self, CyclicSubset};
use zipchow_core::chevalley::{hilbert_inert_adjugate, hilbert_inert_cone, hilbert_inert_matrix};
use zipchow_core::linalg::Matrix;
use zipchow_core::strata::{self, CurveCriteria, Diagram, DiagramFixture};
use zipchow_core::weyl::RootDatum;
use zipchow_core::{Rational, ScalarP};

const PRIMES: [i64; 4] = [2, 3, 5, 7];

type Check = Result<(bool, String), String>;

fn sc(s: &str) -> ScalarP {
    ScalarP::parse(s).unwrap()
}

fn sweep_check(r: zipchow_core::Result<SweepReport>) -> Check {
    let r = r.map_err(|e| e.to_string())?;
    let mut detail = format!("{} cases, {} failures", r.cases, r.failures.len());
    if let Some(f) = r.failures.first() {
        detail.push_str(&format!(", first: {f}"));
    }
    Ok((r.passed(), detail))
}

fn run_cli(args: &[&str]) -> Result<Value, String> {
    let argv: Vec<String> = std::iter::once("zipchow").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = zipchow::run(argv, &mut out, &mut err);
    if code != 0 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

fn worked_example() -> Check {
    let v = run_cli(&["expand", "--d", "5", "--set", "1,3"])?;
    let den = "(p^5+1)";
    let expected: Vec<(Vec<u64>, ScalarP)> = vec![
        (vec![1, 3], sc(&format!("p^3/{den}"))),
        (vec![2, 3], sc(&format!("p^2/{den}"))),
        (vec![1, 4], sc(&format!("p^2/{den}"))),
        (vec![2, 4], sc(&format!("p/{den}"))),
        (vec![0, 1], sc(&format!("p/{den}"))),
        (vec![0, 2], sc(&format!("1/{den}"))),
    ];
    let terms = v["terms"].as_array().ok_or("no terms")?;
    let mut got: Vec<(Vec<u64>, ScalarP)> = terms
        .iter()
        .map(|t| {
            let j = t["J"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
            (j, sc(t["coefficient"].as_str().unwrap()))
        })
        .collect();
    got.sort_by(|a, b| a.0.cmp(&b.0));
    let mut want = expected.clone();
    want.sort_by(|a, b| a.0.cmp(&b.0));
    let matches = got == want;

    // The printed right-hand side carries [{1,2}] where [{0,2}] belongs; only the latter
    // multiplies out to (p^5+1)·l1·l3.
    let i = CyclicSubset::new(5, &[1, 3]).unwrap();
    let target = azip::monomial_l(&i).scale(&sc("p^5+1"));
    let rebuild = |last: &[usize]| {
        let mut acc = azip::strata_n(&CyclicSubset::new(5, last).unwrap());
        for (j, c) in &expected[..5] {
            let js: Vec<usize> = j.iter().map(|&x| x as usize).collect();
            let n = azip::strata_n(&CyclicSubset::new(5, &js).unwrap()).scale(&(c.clone() * sc("p^5+1")));
            acc = acc.try_add(&n).unwrap();
        }
        acc
    };
    let corrected_ok = rebuild(&[0, 2]) == target;
    let printed_ok = rebuild(&[1, 2]) == target;
    let effective = v["effective"].as_bool() == Some(true);
    Ok((
        matches && corrected_ok && !printed_ok && effective,
        format!(
            "{} terms, symbolic match {matches}, ring check {corrected_ok}; printed [{{1,2}}] term multiplies out: {printed_ok} (read as [{{0,2}}])",
            got.len()
        ),
    ))
}

fn classification() -> Check {
    let mut bad = Vec::new();
    let mut count = 0;
    let mut expect = |t: &str, levi: Vec<usize>, want: bool| {
        count += 1;
        let datum = RootDatum::parse(t).unwrap();
        let levi0: Vec<usize> = levi.iter().map(|i| i - 1).collect();
        let got = datum.is_linear(&levi0).unwrap();
        let by_order = datum.linear_by_order_formula(&levi0).unwrap();
        if got != want || by_order != want {
            bad.push(format!("{t} {levi:?}: {got}/{by_order}"));
        }
    };
    for n in 1..=6 {
        expect(&format!("A{n}"), (1..n).collect(), true);
    }
    for n in 2..=6 {
        expect(&format!("B{n}"), (2..=n).collect(), true);
        expect(&format!("C{n}"), (2..=n).collect(), true);
    }
    expect("G2", vec![1], true);
    expect("A3", vec![1, 3], false);
    expect("C3", vec![1, 2], false);
    expect("B3", vec![1, 2], false);
    expect("F4", vec![1, 2, 3], false);
    expect("F4", vec![2, 3, 4], false);
    for n in 4..=6 {
        count += 1;
        let datum = RootDatum::parse(&format!("D{n}")).unwrap();
        let levi: Vec<usize> = (1..n).collect();
        let profile = datum.strat_type(&levi).unwrap();
        let outside = datum.positive_roots().len() - datum.parabolic_positive_count(&levi);
        let mid = outside / 2;
        let ok = mid == n - 1
            && profile.len() == 2 * mid + 1
            && profile.iter().enumerate().all(|(l, &m)| m == if l == mid { 2 } else { 1 });
        if !ok {
            bad.push(format!("D{n}: profile {profile:?}"));
        }
    }
    Ok((bad.is_empty(), format!("{count} pairs{}", if bad.is_empty() { String::new() } else { format!(", wrong: {}", bad.join("; ")) })))
}

fn diagram_fixtures() -> Check {
    let (ok_sweep, detail) = sweep_check(sweep::diagrams())?;
    let dg = Diagram::new(&DiagramFixture::c2()).map_err(|e| e.to_string())?;
    let y1 = dg.class("e").map_err(|e| e.to_string())?;
    let y1_ok = *y1 == dg.ring.parse("(p^4-1)*l1*l2^3").unwrap();
    let mut signs = Vec::new();
    for p in PRIMES {
        let (a, b) = strata::hodge_nonnef_c2(&ScalarP::from_int(p)).map_err(|e| e.to_string())?;
        let (a, b) = (a.as_constant().unwrap(), b.as_constant().unwrap());
        let zero = Rational::from_integer(0.into());
        signs.push(((a < zero && b > zero) || (a > zero && b < zero), format!("p={p}: {a}, {b}")));
    }
    let signs_ok = signs.iter().all(|s| s.0);
    let values: Vec<String> = signs.into_iter().map(|s| s.1).collect();
    Ok((ok_sweep && y1_ok && signs_ok, format!("{detail}; [Y_1] = (p^4-1) l1 l2^3: {y1_ok}; {}", values.join("; "))))
}

fn hilbert_inert() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [2i64, 3, 5, 7, 11] {
        let ps = ScalarP::from_int(p);
        let k = [sc("p^3-1"), sc("p^2"), sc("p^3-1")].map(|c| zipchow_core::strata::curves::substitute(&c, &ps).unwrap());
        let r = hilbert_inert_cone(&k, &ps).map_err(|e| e.to_string())?;
        let m1_neg = !r.m[1].is_nonnegative();
        ok &= m1_neg && !r.in_pha && r.ample;
        parts.push(format!("p={p}: m1={}", r.m[1]));
    }
    let p = ScalarP::p();
    let prod = hilbert_inert_matrix(&p).mul(&hilbert_inert_adjugate(&p));
    let identity = Matrix::<ScalarP>::identity(3).scale(&(&p * &p * p.clone() + ScalarP::one()));
    let inverse_ok = prod == identity;
    ok &= inverse_ok;
    Ok((ok, format!("{}; M·adj = (p^3+1)·Id: {inverse_ok}", parts.join(", "))))
}

fn curve_criteria() -> Check {
    let r = sweep::curves(&PRIMES, 10_000, 1).map_err(|e| e.to_string())?;
    let a2 = CurveCriteria::a2_unitary().map_err(|e| e.to_string())?;
    let mut witness = Vec::new();
    for p in PRIMES {
        let ps = ScalarP::from_int(p);
        let v = a2.at(&ps).and_then(|c| c.verdict(&[ps.clone(), ScalarP::from_int(-1)])).map_err(|e| e.to_string())?;
        witness.push(v.ordinary && !v.strata_effective);
    }
    let witness_ok = witness.iter().all(|&w| w);
    Ok((
        r.passed() && witness_ok,
        format!(
            "{} cases, {} counterexamples{}; witness (p,-1) ordinary and not effective at every prime: {witness_ok}",
            r.cases,
            r.failures.len(),
            r.failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    ))
}

fn reciprocity() -> Check {
    let r = sweep::reciprocity(9).map_err(|e| e.to_string())?;
    let note = |k: &str| r.notes.get(k).map(|v| v.to_string()).unwrap_or_else(|| "?".into());
    Ok((
        r.passed(),
        format!(
            "{} pairs, {} failures; (-1)^d variant holds {} / fails {} (fails with d-|I| even: {})",
            r.cases,
            r.failures.len(),
            note("d_sign_holds"),
            note("d_sign_fails"),
            note("d_sign_fails_with_even_gap")
        ),
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "worked example d=5, I={1,3}", budget: Duration::from_secs(1), check: worked_example },
        Criterion {
            id: 2,
            name: "codimension-one expansion, d <= 8",
            budget: Duration::from_secs(5),
            check: || sweep_check(sweep::codim_one(8)),
        },
        Criterion {
            id: 3,
            name: "closed form vs oracle, d <= 10, A_m(0) permutation",
            budget: Duration::from_secs(300),
            check: || sweep_check(sweep::oracle(10, &PRIMES)),
        },
        Criterion {
            id: 4,
            name: "nonnegativity certificates, d <= 10",
            budget: Duration::from_secs(300),
            check: || sweep_check(sweep::nonnegativity(10, &PRIMES)),
        },
        Criterion { id: 5, name: "reciprocity, d <= 9", budget: Duration::from_secs(120), check: reciprocity },
        Criterion {
            id: 6,
            name: "interval expansion, d <= 9",
            budget: Duration::from_secs(300),
            check: || sweep_check(sweep::interval(9)),
        },
        Criterion {
            id: 7,
            name: "orthogonality, d <= 8",
            budget: Duration::from_secs(300),
            check: || sweep_check(sweep::orthogonality(8)),
        },
        Criterion { id: 8, name: "linear classification", budget: Duration::from_secs(10), check: classification },
        Criterion { id: 9, name: "stratum diagrams", budget: Duration::from_secs(300), check: diagram_fixtures },
        Criterion { id: 10, name: "inert Hilbert threefold", budget: Duration::from_secs(300), check: hilbert_inert },
        Criterion {
            id: 11,
            name: "type A proportionality, n <= 8",
            budget: Duration::from_secs(300),
            check: || sweep_check(sweep::proportionality(8)),
        },
        Criterion { id: 12, name: "curve criteria", budget: Duration::from_secs(300), check: curve_criteria },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let timing = format!("{:.2}s of {}s{}", elapsed.as_secs_f64(), c.budget.as_secs(), if in_time { "" } else { " OVER BUDGET" });
        println!("{} criterion {:>2}: {} [{timing}] {detail}", if ok { "PASS" } else { "FAIL" }, c.id, c.name);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
