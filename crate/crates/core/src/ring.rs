//! Graded quotient rings given by explicit rewriting systems.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::scalar::Field;
use crate::{Rational, ScalarP};

/// Raw monomials above this degree are rejected when building elements.
pub const MAX_RAW_DEGREE: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonomialOrder {
    DegLex,
    Lex,
}

/// Exponent vector; the derived order is lexicographic with the first generator largest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u16>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`, assuming divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
}

/// `lhs → Σ c·m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Monomial,
    pub rhs: Vec<(Monomial, Rational)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RingPresentation {
    pub name: String,
    pub generators: Vec<Generator>,
    pub order: MonomialOrder,
    pub top_degree: usize,
    /// The defining relations, as polynomials with rational coefficients.
    pub relations: Vec<Vec<(Monomial, Rational)>>,
    pub rules: Vec<Rule>,
    /// Named abbreviations usable in parsed expressions, e.g. `lambda1 = l1+l2`.
    pub aliases: Vec<(String, String)>,
}

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn mono(e: &[u16]) -> Monomial {
    Monomial(e.to_vec())
}

impl RingPresentation {
    fn gens(names: &[&str], degrees: &[usize]) -> Vec<Generator> {
        names.iter().zip(degrees).map(|(n, &d)| Generator { name: n.to_string(), degree: d }).collect()
    }

    /// `Q[l_0, …, l_{d−1}] / (l_i²)`.
    pub fn hilbert(d: usize) -> Arc<Self> {
        let names: Vec<String> = (0..d).map(|i| format!("l{i}")).collect();
        let rules: Vec<Rule> = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 2;
                Rule { lhs: Monomial(e), rhs: Vec::new() }
            })
            .collect();
        Arc::new(RingPresentation {
            name: format!("hilbert({d})"),
            generators: names.iter().map(|n| Generator { name: n.clone(), degree: 1 }).collect(),
            order: MonomialOrder::DegLex,
            top_degree: d,
            relations: rules.iter().map(|r| vec![(r.lhs.clone(), q(1))]).collect(),
            rules,
            aliases: Vec::new(),
        })
    }

    /// Flag ring for C2: `Q[l1, l2] / (l1² + l2², l1² l2²)`.
    pub fn c2_flag() -> Arc<Self> {
        Arc::new(RingPresentation {
            name: "c2_flag".into(),
            generators: Self::gens(&["l1", "l2"], &[1, 1]),
            order: MonomialOrder::DegLex,
            top_degree: 4,
            relations: vec![
                vec![(mono(&[2, 0]), q(1)), (mono(&[0, 2]), q(1))],
                vec![(mono(&[2, 2]), q(1))],
            ],
            rules: vec![
                Rule { lhs: mono(&[2, 0]), rhs: vec![(mono(&[0, 2]), q(-1))] },
                Rule { lhs: mono(&[0, 4]), rhs: Vec::new() },
            ],
            aliases: vec![("lambda1".into(), "l1+l2".into()), ("lambda2".into(), "l1*l2".into())],
        })
    }

    /// Base ring for C2: `Q[λ1, λ2] / (λ1² − 2λ2)` with `deg λ2 = 2`, truncated above degree 3.
    pub fn c2_base() -> Arc<Self> {
        Arc::new(RingPresentation {
            name: "c2_base".into(),
            generators: Self::gens(&["lambda1", "lambda2"], &[1, 2]),
            order: MonomialOrder::DegLex,
            top_degree: 3,
            relations: vec![vec![(mono(&[2, 0]), q(1)), (mono(&[0, 1]), q(-2))]],
            rules: vec![Rule { lhs: mono(&[2, 0]), rhs: vec![(mono(&[0, 1]), q(2))] }],
            aliases: Vec::new(),
        })
    }

    fn a2(name: &str) -> Arc<Self> {
        Arc::new(RingPresentation {
            name: name.into(),
            generators: Self::gens(&["l1", "l2"], &[1, 1]),
            order: MonomialOrder::DegLex,
            top_degree: 3,
            relations: vec![
                vec![(mono(&[2, 0]), q(1)), (mono(&[1, 1]), q(1)), (mono(&[0, 2]), q(1))],
                vec![(mono(&[1, 2]), q(1)), (mono(&[2, 1]), q(1))],
            ],
            rules: vec![
                Rule { lhs: mono(&[2, 0]), rhs: vec![(mono(&[1, 1]), q(-1)), (mono(&[0, 2]), q(-1))] },
                Rule { lhs: mono(&[0, 3]), rhs: Vec::new() },
            ],
            aliases: vec![("lambda1".into(), "l1+l2".into())],
        })
    }

    /// Flag ring for unitary A2: `Q[l1, l2] / (l1² + l1l2 + l2², l1l2² + l1²l2)`.
    pub fn a2_unitary() -> Arc<Self> {
        Self::a2("a2_unitary")
    }

    /// Flag ring for split A2, same presentation as the unitary case.
    pub fn a2_split() -> Arc<Self> {
        Self::a2("a2_split")
    }

    /// Coinvariant ring `Q[l1, …, ln] / (e_1, …, e_n)` with the lex Gröbner rules
    /// `l_k^k → l_k^k − h_k(l_k, …, l_n)`.
    pub fn coinvariant(n: usize) -> Arc<Self> {
        let names: Vec<String> = (1..=n).map(|i| format!("l{i}")).collect();
        let mut rules = Vec::new();
        for k in 1..=n {
            let mut rhs = Vec::new();
            for m in monomials_of_degree(n - k + 1, k) {
                let mut e = vec![0u16; k - 1];
                e.extend(m.0.iter());
                if e[k - 1] as usize == k {
                    continue;
                }
                rhs.push((Monomial(e), q(-1)));
            }
            let mut lhs = vec![0u16; n];
            lhs[k - 1] = k as u16;
            rules.push(Rule { lhs: Monomial(lhs), rhs });
        }
        let relations = (1..=n)
            .map(|k| {
                monomials_of_degree(n, k)
                    .into_iter()
                    .filter(|m| m.0.iter().all(|&e| e <= 1))
                    .map(|m| (m, q(1)))
                    .collect()
            })
            .collect();
        Arc::new(RingPresentation {
            name: format!("coinvariant({n})"),
            generators: names.iter().map(|s| Generator { name: s.clone(), degree: 1 }).collect(),
            order: MonomialOrder::Lex,
            top_degree: n * (n - 1) / 2,
            relations,
            rules,
            aliases: Vec::new(),
        })
    }

    /// Graded tensor product; generator names get `_a` / `_b` suffixes on collision.
    pub fn tensor(a: &RingPresentation, b: &RingPresentation) -> Arc<Self> {
        let clash = a.generators.iter().any(|g| b.generators.iter().any(|h| h.name == g.name));
        let rename = |g: &Generator, suffix: &str| Generator {
            name: if clash { format!("{}_{suffix}", g.name) } else { g.name.clone() },
            degree: g.degree,
        };
        let na = a.generators.len();
        let nb = b.generators.len();
        let left = |m: &Monomial| {
            let mut e = m.0.clone();
            e.extend(std::iter::repeat_n(0, nb));
            Monomial(e)
        };
        let right = |m: &Monomial| {
            let mut e = vec![0u16; na];
            e.extend(m.0.iter());
            Monomial(e)
        };
        let lift = |r: &Rule, f: &dyn Fn(&Monomial) -> Monomial| Rule {
            lhs: f(&r.lhs),
            rhs: r.rhs.iter().map(|(m, c)| (f(m), c.clone())).collect(),
        };
        let mut rules: Vec<Rule> = a.rules.iter().map(|r| lift(r, &left)).collect();
        rules.extend(b.rules.iter().map(|r| lift(r, &right)));
        // each factor vanishes above its own top degree
        for (top, gens, f) in [(a.top_degree, &a.generators, &left as &dyn Fn(&Monomial) -> Monomial), (b.top_degree, &b.generators, &right)] {
            let degs: Vec<usize> = gens.iter().map(|g| g.degree).collect();
            for m in monomials_weighted(&degs, top + 1) {
                if m.0.iter().zip(&degs).map(|(&e, &d)| e as usize * d).sum::<usize>() != top + 1 {
                    continue;
                }
                if !rules.iter().any(|r| r.lhs.divides(&f(&m))) {
                    rules.push(Rule { lhs: f(&m), rhs: Vec::new() });
                }
            }
        }
        let mut relations: Vec<Vec<(Monomial, Rational)>> =
            a.relations.iter().map(|r| r.iter().map(|(m, c)| (left(m), c.clone())).collect()).collect();
        relations.extend(b.relations.iter().map(|r| r.iter().map(|(m, c)| (right(m), c.clone())).collect()));
        let mut generators: Vec<Generator> = a.generators.iter().map(|g| rename(g, "a")).collect();
        generators.extend(b.generators.iter().map(|g| rename(g, "b")));
        Arc::new(RingPresentation {
            name: format!("{}*{}", a.name, b.name),
            generators,
            order: MonomialOrder::DegLex,
            top_degree: a.top_degree + b.top_degree,
            relations,
            rules,
            aliases: Vec::new(),
        })
    }

    /// Look up a built-in presentation by name.
    pub fn by_name(name: &str) -> Result<Arc<Self>> {
        let arg = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.strip_suffix(')')?.parse().ok() };
        match name {
            "c2_flag" => Ok(Self::c2_flag()),
            "c2_base" => Ok(Self::c2_base()),
            "a2_unitary" => Ok(Self::a2_unitary()),
            "a2_split" => Ok(Self::a2_split()),
            _ => {
                if let Some(d) = arg("hilbert(") {
                    return Ok(Self::hilbert(d));
                }
                if let Some(n) = arg("coinvariant(") {
                    return Ok(Self::coinvariant(n));
                }
                Err(Error::Fixture(format!("unknown presentation `{name}`")))
            }
        }
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    /// Every rule kills the square of a degree-one generator.
    pub fn is_square_free(&self) -> bool {
        self.rules.len() == self.ngens()
            && self.generators.iter().all(|g| g.degree == 1)
            && self.rules.iter().all(|r| r.rhs.is_empty() && r.lhs.total() == 2 && r.lhs.0.contains(&2))
    }

    /// Normal form of a raw polynomial.
    pub fn reduce<C: Field>(self: &Arc<Self>, raw: impl IntoIterator<Item = (Monomial, C)>) -> Result<RingElement<C>> {
        RingElement::from_terms(self, raw)
    }

    pub fn degree_of(&self, m: &Monomial) -> usize {
        m.0.iter().zip(&self.generators).map(|(&e, g)| e as usize * g.degree).sum()
    }

    pub fn is_normal(&self, m: &Monomial) -> bool {
        self.degree_of(m) <= self.top_degree && !self.rules.iter().any(|r| r.lhs.divides(m))
    }

    fn degrees(&self) -> Vec<usize> {
        self.generators.iter().map(|g| g.degree).collect()
    }

    /// Normal-form monomials of degree `m`, largest first.
    pub fn degree_basis(&self, m: usize) -> Vec<Monomial> {
        if m > self.top_degree {
            return Vec::new();
        }
        let mut out: Vec<Monomial> = monomials_weighted(&self.degrees(), m)
            .into_iter()
            .filter(|x| self.degree_of(x) == m && self.is_normal(x))
            .collect();
        out.sort_by(|a, b| self.cmp_monomials(b, a));
        out
    }

    pub fn graded_dims(&self) -> Vec<usize> {
        (0..=self.top_degree).map(|m| self.degree_basis(m).len()).collect()
    }

    pub fn cmp_monomials(&self, a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
        match self.order {
            MonomialOrder::DegLex => self.degree_of(a).cmp(&self.degree_of(b)).then_with(|| a.cmp(b)),
            MonomialOrder::Lex => a.cmp(b),
        }
    }

    /// Rules must decrease in the declared order, and each relation must reduce to zero.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for r in &self.rules {
            for (m, _) in &r.rhs {
                if self.cmp_monomials(m, &r.lhs) != std::cmp::Ordering::Less {
                    return Err(format!("rule {} is not decreasing", self.monomial_string(&r.lhs)));
                }
            }
        }
        for rel in &self.relations {
            let terms = rel.iter().map(|(m, c)| (m.clone(), c.clone()));
            let red: BTreeMap<Monomial, Rational> = self.reduce_terms(terms);
            if !red.is_empty() {
                return Err("a relation does not reduce to zero".into());
            }
        }
        Ok(())
    }

    /// Reduce every monomial of degree at most `max_degree` under every admissible first
    /// rewrite and check that all choices meet.
    pub fn check_confluence(&self, max_degree: usize) -> std::result::Result<(), String> {
        for m in monomials_weighted(&self.degrees(), max_degree) {
            let mut results: Vec<BTreeMap<Monomial, Rational>> = Vec::new();
            for r in self.rules.iter().filter(|r| r.lhs.divides(&m)) {
                let q = m.div(&r.lhs);
                let terms = r.rhs.iter().map(|(t, c)| (q.mul(t), c.clone()));
                results.push(self.reduce_terms(terms));
            }
            if results.windows(2).any(|w| w[0] != w[1]) {
                return Err(format!("critical monomial {} is not joinable", self.monomial_string(&m)));
            }
        }
        Ok(())
    }

    /// Normal form of a finite sum of terms; terms above the top degree vanish.
    pub fn reduce_terms<C: Field>(&self, raw: impl IntoIterator<Item = (Monomial, C)>) -> BTreeMap<Monomial, C> {
        let mut work: BTreeMap<(usize, Monomial), C> = BTreeMap::new();
        let push = |work: &mut BTreeMap<(usize, Monomial), C>, deg: usize, m: Monomial, c: C| {
            if c.is_zero() {
                return;
            }
            match work.entry((deg, m)) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let s = o.get().clone() + c;
                    if s.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = s;
                    }
                }
            }
        };
        for (m, c) in raw {
            let deg = self.degree_of(&m);
            if deg <= self.top_degree {
                push(&mut work, deg, m, c);
            }
        }
        let mut out = BTreeMap::new();
        while let Some(((_, m), c)) = work.pop_last() {
            match self.rules.iter().find(|r| r.lhs.divides(&m)) {
                None => {
                    let e = out.entry(m).or_insert_with(C::zero);
                    *e = e.clone() + c;
                }
                Some(r) => {
                    let quot = m.div(&r.lhs);
                    for (t, a) in &r.rhs {
                        let mt = quot.mul(t);
                        let dt = self.degree_of(&mt);
                        push(&mut work, dt, mt, c.clone() * C::from_rational(a));
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn monomial_string(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .0
            .iter()
            .zip(&self.generators)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, g)| if e == 1 { g.name.clone() } else { format!("{}^{e}", g.name) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn parse_monomial(&self, s: &str) -> Result<Monomial> {
        let mut e = vec![0u16; self.ngens()];
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial(e));
        }
        for part in s.split('*') {
            let (name, pow) = match part.split_once('^') {
                Some((n, k)) => (n.trim(), k.trim().parse::<u16>().map_err(|_| Error::Parse { pos: 0, msg: format!("bad exponent in `{part}`") })?),
                None => (part.trim(), 1),
            };
            let i = self
                .generators
                .iter()
                .position(|g| g.name == name)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
            e[i] += pow;
        }
        Ok(Monomial(e))
    }
}

/// All exponent vectors of total degree exactly `k` in `n` variables.
pub fn monomials_of_degree(n: usize, k: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i + 1 == cur.len() {
            cur[i] = left as u16;
            out.push(Monomial(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u16;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if k == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// All exponent vectors of weighted degree at most `k`.
pub fn monomials_weighted(degrees: &[usize], k: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; degrees.len()];
    fn rec(i: usize, left: usize, degrees: &[usize], cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if i == degrees.len() {
            out.push(Monomial(cur.clone()));
            return;
        }
        let mut e = 0;
        while e * degrees[i] <= left {
            cur[i] = e as u16;
            rec(i + 1, left - e * degrees[i], degrees, cur, out);
            e += 1;
        }
        cur[i] = 0;
    }
    rec(0, k, degrees, &mut cur, &mut out);
    out
}

/// A normal-form element with coefficients in `C`.
#[derive(Clone, Debug)]
pub struct RingElement<C> {
    pres: Arc<RingPresentation>,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Field> PartialEq for RingElement<C> {
    fn eq(&self, other: &Self) -> bool {
        self.pres.name == other.pres.name && self.terms == other.terms
    }
}

impl<C: Field> RingElement<C> {
    pub fn zero(pres: &Arc<RingPresentation>) -> Self {
        RingElement { pres: pres.clone(), terms: BTreeMap::new() }
    }

    pub fn one(pres: &Arc<RingPresentation>) -> Self {
        Self::constant(pres, C::one())
    }

    pub fn constant(pres: &Arc<RingPresentation>, c: C) -> Self {
        Self::from_terms(pres, [(Monomial::one(pres.ngens()), c)]).expect("constant term")
    }

    pub fn generator(pres: &Arc<RingPresentation>, i: usize) -> Self {
        Self::from_terms(pres, [(Monomial::var(pres.ngens(), i), C::one())]).expect("generator")
    }

    pub fn monomial(pres: &Arc<RingPresentation>, m: Monomial) -> Result<Self> {
        Self::from_terms(pres, [(m, C::one())])
    }

    /// Reduce a raw polynomial into normal form.
    pub fn from_terms(pres: &Arc<RingPresentation>, raw: impl IntoIterator<Item = (Monomial, C)>) -> Result<Self> {
        let raw: Vec<(Monomial, C)> = raw.into_iter().collect();
        for (m, _) in &raw {
            if m.0.len() != pres.ngens() {
                return Err(Error::OutOfRange(format!("monomial with {} exponents", m.0.len())));
            }
            let deg = pres.degree_of(m);
            if deg > MAX_RAW_DEGREE {
                return Err(Error::DegreeOverflow { degree: deg, bound: MAX_RAW_DEGREE });
            }
        }
        Ok(RingElement { pres: pres.clone(), terms: pres.reduce_terms(raw) })
    }

    pub fn presentation(&self) -> &Arc<RingPresentation> {
        &self.pres
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Terms in descending monomial order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| self.pres.cmp_monomials(b.0, a.0));
        v
    }

    /// `Some(k)` if every term has degree `k`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(|m| self.pres.degree_of(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// The constant term if the element is a scalar.
    pub fn as_scalar(&self) -> Option<C> {
        if self.terms.is_empty() {
            return Some(C::zero());
        }
        let one = Monomial::one(self.pres.ngens());
        (self.terms.len() == 1 && self.terms.contains_key(&one)).then(|| self.terms[&one].clone())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.pres, &other.pres) || *self.pres == *other.pres {
            Ok(())
        } else {
            Err(Error::PresentationMismatch(self.pres.name.clone(), other.pres.name.clone()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert_with(C::zero);
            *e = e.clone() + c.clone();
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(RingElement { pres: self.pres.clone(), terms })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        RingElement { pres: self.pres.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(&self.pres);
        }
        RingElement { pres: self.pres.clone(), terms: self.terms.iter().map(|(m, a)| (m.clone(), a.clone() * c.clone())).collect() }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut raw = Vec::with_capacity(self.terms.len() * other.terms.len());
        let square_free = self.pres.is_square_free();
        let top = self.pres.top_degree;
        for (m1, c1) in &self.terms {
            let d1 = self.pres.degree_of(m1);
            for (m2, c2) in &other.terms {
                if square_free && m1.0.iter().zip(&m2.0).any(|(a, b)| a + b > 1) {
                    continue;
                }
                if d1 + self.pres.degree_of(m2) > top {
                    continue;
                }
                raw.push((m1.mul(m2), c1.clone() * c2.clone()));
            }
        }
        Ok(RingElement { pres: self.pres.clone(), terms: self.pres.reduce_terms(raw) })
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::one(&self.pres);
        for _ in 0..k {
            acc = acc.multiply(self)?;
        }
        Ok(acc)
    }

    /// Coordinates in the given list of normal monomials; `None` if the element has
    /// support outside the list.
    pub fn coordinates(&self, basis: &[Monomial]) -> Option<Vec<C>> {
        if self.terms.keys().any(|m| !basis.contains(m)) {
            return None;
        }
        Some(basis.iter().map(|m| self.coeff(m)).collect())
    }

    /// Map coefficients into another field.
    pub fn map_coeffs<D: Field>(&self, f: impl Fn(&C) -> D) -> RingElement<D> {
        let mut terms: BTreeMap<Monomial, D> = self.terms.iter().map(|(m, c)| (m.clone(), f(c))).collect();
        terms.retain(|_, c| !c.is_zero());
        RingElement { pres: self.pres.clone(), terms }
    }

    /// Transport along a monomial map into another presentation, then reduce.
    pub fn transport(&self, target: &Arc<RingPresentation>, f: impl Fn(&Monomial) -> Monomial) -> Result<Self> {
        RingElement::from_terms(target, self.terms.iter().map(|(m, c)| (f(m), c.clone())))
    }
}

/// Exterior product of elements of the two factors of a tensor presentation.
pub fn exterior<C: Field>(t: &Arc<RingPresentation>, a: &RingElement<C>, b: &RingElement<C>) -> Result<RingElement<C>> {
    let na = a.pres.ngens();
    if na + b.pres.ngens() != t.ngens() {
        return Err(Error::PresentationMismatch(t.name.clone(), format!("{}*{}", a.pres.name, b.pres.name)));
    }
    let mut raw = Vec::new();
    for (m1, c1) in &a.terms {
        for (m2, c2) in &b.terms {
            let mut e = m1.0.clone();
            e.extend(m2.0.iter());
            raw.push((Monomial(e), c1.clone() * c2.clone()));
        }
    }
    RingElement::from_terms(t, raw)
}

/// Elements with coefficients in `p`.
pub type Element = RingElement<ScalarP>;

impl Element {
    /// Division by a scalar element.
    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        let c = rhs.as_scalar().ok_or(Error::NonScalarDivision)?;
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.scale(&(ScalarP::one() / c)))
    }
}

/// Expression tree evaluated inside a fixed presentation; numbers become constants.
fn eval_in(pres: &Arc<RingPresentation>, e: &Expr, depth: usize) -> Result<Element> {
    if depth > 16 {
        return Err(Error::Parse { pos: 0, msg: "alias recursion".into() });
    }
    Ok(match e {
        Expr::Num(n) => Element::constant(pres, ScalarP::constant(Rational::from_integer(n.clone()))),
        Expr::Sym(s) => {
            if s == "p" {
                Element::constant(pres, ScalarP::p())
            } else if let Some(i) = pres.generators.iter().position(|g| &g.name == s) {
                Element::generator(pres, i)
            } else if let Some((_, def)) = pres.aliases.iter().find(|(n, _)| n == s) {
                eval_in(pres, &expr::parse(def)?, depth + 1)?
            } else {
                return Err(Error::UnknownSymbol(s.clone()));
            }
        }
        Expr::Neg(a) => eval_in(pres, a, depth)?.neg(),
        Expr::Add(a, b) => eval_in(pres, a, depth)?.try_add(&eval_in(pres, b, depth)?)?,
        Expr::Sub(a, b) => eval_in(pres, a, depth)?.try_sub(&eval_in(pres, b, depth)?)?,
        Expr::Mul(a, b) => eval_in(pres, a, depth)?.multiply(&eval_in(pres, b, depth)?)?,
        Expr::Div(a, b) => eval_in(pres, a, depth)?.try_div(&eval_in(pres, b, depth)?)?,
        Expr::Pow(a, k) => eval_in(pres, a, depth)?.pow(*k)?,
    })
}

impl RingPresentation {
    /// Parse an element such as `(p-1)*(l1+l2)` or `lambda1*lambda2`.
    pub fn parse(self: &Arc<Self>, s: &str) -> Result<Element> {
        eval_in(self, &expr::parse(s)?, 0)
    }
}

/// Coordinates `x` with `target = Σ x_k classes[k]`, where the classes form a basis of
/// the graded piece containing `target`.
pub fn express_in_classes(classes: &[Element], target: &Element) -> Result<Vec<ScalarP>> {
    let pres = target.presentation().clone();
    let degree = match classes.iter().find_map(|c| c.homogeneous_degree()) {
        Some(d) => d,
        None => return Err(Error::Singular),
    };
    if !target.is_zero() && target.homogeneous_degree() != Some(degree) {
        return Err(Error::OutOfRange("target is not in the degree of the classes".into()));
    }
    let basis = pres.degree_basis(degree);
    if basis.len() != classes.len() {
        return Err(Error::Singular);
    }
    let mut a = crate::linalg::Matrix::zeros(basis.len(), classes.len());
    for (j, c) in classes.iter().enumerate() {
        let col = c.coordinates(&basis).ok_or(Error::Singular)?;
        for (i, v) in col.into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let b = target.coordinates(&basis).ok_or(Error::Singular)?;
    a.solve(&b)
}

fn coeff_needs_parens(s: &str) -> bool {
    s.chars().skip(1).any(|c| c == '+' || c == '-') || s.contains('/') || s.contains('*')
}

impl<C: Field + fmt::Display> fmt::Display for RingElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                let cs = c.to_string();
                let cs = if coeff_needs_parens(&cs) { format!("({cs})") } else { cs };
                format!("{cs} * {}", self.pres.monomial_string(m))
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub monomial: String,
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementJson {
    pub presentation: String,
    pub terms: Vec<TermJson>,
}

impl Element {
    pub fn to_json(&self) -> ElementJson {
        ElementJson {
            presentation: self.pres.name.clone(),
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(m, c)| TermJson { monomial: self.pres.monomial_string(m), num: c.num_string(), den: c.den_string() })
                .collect(),
        }
    }

    pub fn from_json(j: &ElementJson) -> Result<Self> {
        let pres = RingPresentation::by_name(&j.presentation)?;
        let mut raw = Vec::new();
        for t in &j.terms {
            let num = ScalarP::parse(&t.num)?;
            let den = ScalarP::parse(&t.den)?;
            let c = num.checked_div(&den).ok_or(Error::DivisionByZero)?;
            raw.push((pres.parse_monomial(&t.monomial)?, c));
        }
        Element::from_terms(&pres, raw)
    }

    /// Evaluate the coefficients at an integer `p`.
    pub fn at_p(&self, p: i64) -> Result<RingElement<Rational>> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = c.eval_int(p).ok_or(Error::DivisionByZero)?;
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Ok(RingElement { pres: self.pres.clone(), terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(pres: &Arc<RingPresentation>, s: &str) -> Element {
        pres.parse(s).unwrap()
    }

    #[test]
    fn builtin_presentations_are_valid_and_confluent() {
        let mut all = vec![
            RingPresentation::c2_flag(),
            RingPresentation::c2_base(),
            RingPresentation::a2_unitary(),
            RingPresentation::a2_split(),
            RingPresentation::coinvariant(3),
            RingPresentation::coinvariant(4),
        ];
        all.extend((1..=5).map(RingPresentation::hilbert));
        for p in all {
            p.validate().unwrap();
            p.check_confluence(p.top_degree + 1).unwrap();
        }
    }

    #[test]
    fn square_killing() {
        let r = RingPresentation::hilbert(2);
        assert!(el(&r, "l0^2").is_zero());
        let r3 = RingPresentation::hilbert(3);
        let prod = el(&r3, "(p*l0+l1)*(p*l1+l2)");
        assert_eq!(prod, el(&r3, "p^2*l0*l1 + p*l0*l2 + l1*l2"));
    }

    #[test]
    fn c2_rewrites() {
        let r = RingPresentation::c2_flag();
        assert_eq!(el(&r, "l1^2"), el(&r, "-l2^2"));
        assert_eq!(r.graded_dims(), vec![1, 2, 2, 2, 1]);
        let b3: Vec<String> = r.degree_basis(3).iter().map(|m| r.monomial_string(m)).collect();
        assert_eq!(b3, vec!["l1*l2^2", "l2^3"]);
        let top: Vec<String> = r.degree_basis(4).iter().map(|m| r.monomial_string(m)).collect();
        assert_eq!(top, vec!["l1*l2^3"]);
    }

    #[test]
    fn a2_rewrites() {
        let r = RingPresentation::a2_unitary();
        assert_eq!(el(&r, "l1^2"), el(&r, "-l2^2-l1*l2"));
        assert_eq!(r.graded_dims(), vec![1, 2, 2, 1]);
        assert_eq!(el(&r, "l1^2*l2"), el(&r, "-l1*l2^2"));
    }

    #[test]
    fn aliases_expand() {
        let r = RingPresentation::c2_flag();
        assert_eq!(el(&r, "lambda1*lambda2"), el(&r, "(l1+l2)*l1*l2"));
    }

    #[test]
    fn c2_base_maps_to_flag_ring() {
        let base = RingPresentation::c2_base();
        let flag = RingPresentation::c2_flag();
        // λ1² − 2λ2 ↦ (l1+l2)² − 2 l1 l2 = l1² + l2² = 0
        assert!(el(&flag, "(l1+l2)^2 - 2*l1*l2").is_zero());
        assert_eq!(base.graded_dims(), vec![1, 1, 1, 1]);
        assert_eq!(el(&base, "lambda1^3"), el(&base, "2*lambda1*lambda2"));
    }

    #[test]
    fn coinvariant_dims_are_mahonian() {
        // coefficients of Π_{k=1}^{n} (1 + q + … + q^{k−1})
        for n in 1..=5 {
            let mut mahonian = vec![1usize];
            for k in 1..=n {
                let mut next = vec![0usize; mahonian.len() + k - 1];
                for (i, &c) in mahonian.iter().enumerate() {
                    for j in 0..k {
                        next[i + j] += c;
                    }
                }
                mahonian = next;
            }
            assert_eq!(RingPresentation::coinvariant(n).graded_dims(), mahonian, "n={n}");
        }
    }

    #[test]
    fn text_and_json_round_trip() {
        let r = RingPresentation::c2_flag();
        let x = el(&r, "(p^2-1)/(p+3)*l1*l2^3 - p*l2^2 + 1/2*l1");
        let text = x.to_string();
        assert_eq!(r.parse(&text).unwrap(), x, "{text}");
        let j = x.to_json();
        assert_eq!(Element::from_json(&j).unwrap(), x);
    }

    #[test]
    fn mismatch_detected() {
        let a = el(&RingPresentation::hilbert(2), "l0");
        let b = el(&RingPresentation::hilbert(3), "l0");
        assert!(matches!(a.multiply(&b), Err(Error::PresentationMismatch(..))));
        let r = RingPresentation::c2_flag();
        assert!(matches!(r.parse("l1/l2"), Err(Error::NonScalarDivision)));
    }

    #[test]
    fn tensor_of_square_free_rings() {
        let a = RingPresentation::hilbert(1);
        let t = RingPresentation::tensor(&a, &a);
        assert_eq!(t.graded_dims(), RingPresentation::hilbert(2).graded_dims());
        let b = RingPresentation::hilbert(3);
        let t = RingPresentation::tensor(&RingPresentation::hilbert(2), &b);
        assert_eq!(t.graded_dims(), vec![1, 5, 10, 10, 5, 1]);
        t.check_confluence(t.top_degree + 1).unwrap();
    }

    #[test]
    fn raw_degree_bound() {
        let r = RingPresentation::hilbert(2);
        let m = Monomial(vec![300, 0]);
        assert!(matches!(Element::from_terms(&r, [(m, ScalarP::one())]), Err(Error::DegreeOverflow { .. })));
    }
}
