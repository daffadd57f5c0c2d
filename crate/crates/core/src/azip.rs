//! Strata expansions of Hodge–Chern monomials in type A1^d.
//!
//! The Chow ring is `R = Q[l_0, …, l_{d−1}] / (l_i²)`. Strata classes are
//! `N_J = Π_{j∈J} (p l_j − l_{j+1})`, their positive counterparts are
//! `P_I = Π_{i∈I} (p l_i + l_{i+1})`, and `L_I = Π_{i∈I} l_i`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::det_mod_prime;
use crate::poly::Poly;
use crate::ring::{express_in_classes, Element, Monomial, RingPresentation};
use crate::{PolyP, Rational, ScalarP};

/// Largest modulus representable by the bitset.
pub const MAX_MODULUS: usize = 63;

/// A subset of `Z/d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CyclicSubset {
    d: usize,
    bits: u64,
}

impl CyclicSubset {
    pub fn new(d: usize, members: &[usize]) -> Result<Self> {
        if d == 0 || d > MAX_MODULUS {
            return Err(Error::OutOfRange(format!("modulus {d}")));
        }
        let mut bits = 0u64;
        for &i in members {
            if i >= d {
                return Err(Error::OutOfRange(format!("{i} is not in Z/{d}")));
            }
            bits |= 1 << i;
        }
        Ok(CyclicSubset { d, bits })
    }

    pub fn from_bits(d: usize, bits: u64) -> Self {
        debug_assert!(d <= MAX_MODULUS && bits >> d == 0);
        CyclicSubset { d, bits }
    }

    pub fn empty(d: usize) -> Self {
        CyclicSubset { d, bits: 0 }
    }

    pub fn full(d: usize) -> Self {
        CyclicSubset { d, bits: (1u64 << d) - 1 }
    }

    /// Parse a comma-separated member list such as `1,3`; the empty string is `∅`.
    pub fn parse(d: usize, s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        let members: Vec<usize> = if s.trim().is_empty() {
            Vec::new()
        } else {
            s.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse { pos: 0, msg: format!("bad member `{t}`") }))
                .collect::<Result<_>>()?
        };
        Self::new(d, &members)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.d
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits >> (i % self.d) & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.d).filter(|&i| self.contains(i)).collect()
    }

    pub fn complement(&self) -> Self {
        CyclicSubset { d: self.d, bits: !self.bits & ((1u64 << self.d) - 1) }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        CyclicSubset { d: self.d, bits: self.bits & other.bits }
    }

    pub fn union(&self, other: &Self) -> Self {
        CyclicSubset { d: self.d, bits: self.bits | other.bits }
    }

    /// `{i + k : i ∈ self}`.
    pub fn shift(&self, k: isize) -> Self {
        let d = self.d as isize;
        let mut out = Self::empty(self.d);
        for i in self.members() {
            out.bits |= 1 << ((i as isize + k).rem_euclid(d));
        }
        out
    }

    /// `{a, a+1, …, a+len−1}`.
    pub fn interval(d: usize, a: usize, len: usize) -> Self {
        let mut out = Self::empty(d);
        for k in 0..len.min(d) {
            out.bits |= 1 << ((a + k) % d);
        }
        out
    }

    /// All subsets of size `m`, in lexicographic order of member lists.
    pub fn all_of_size(d: usize, m: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (0..1u64 << d)
            .filter(|b| b.count_ones() as usize == m)
            .map(|b| Self::from_bits(d, b))
            .collect();
        out.sort();
        out
    }

    /// The square-free monomial `L_self` as an exponent vector.
    pub fn monomial(&self) -> Monomial {
        Monomial((0..self.d).map(|i| self.contains(i) as u16).collect())
    }

    pub fn from_monomial(m: &Monomial) -> Option<Self> {
        let d = m.0.len();
        let mut bits = 0u64;
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(Self::from_bits(d, bits))
    }
}

impl Ord for CyclicSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d.cmp(&other.d).then_with(|| self.members().cmp(&other.members()))
    }
}

impl PartialOrd for CyclicSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CyclicSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

/// Maximal cyclic intervals `[a_t, b_t]`, ordered by starting point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalDecomposition {
    pub d: usize,
    pub intervals: Vec<(usize, usize)>,
}

impl IntervalDecomposition {
    pub fn interval_len(&self, t: usize) -> usize {
        let (a, b) = self.intervals[t];
        (b + self.d - a) % self.d + 1
    }

    pub fn interval_set(&self, t: usize) -> CyclicSubset {
        CyclicSubset::interval(self.d, self.intervals[t].0, self.interval_len(t))
    }

    /// `[a_t, b_t + 1]`.
    pub fn extended_set(&self, t: usize) -> CyclicSubset {
        CyclicSubset::interval(self.d, self.intervals[t].0, self.interval_len(t) + 1)
    }

    pub fn union(&self) -> CyclicSubset {
        (0..self.intervals.len()).fold(CyclicSubset::empty(self.d), |acc, t| acc.union(&self.interval_set(t)))
    }
}

pub fn interval_decompose(set: &CyclicSubset) -> Result<IntervalDecomposition> {
    let d = set.d();
    if set.is_empty() {
        return Err(Error::EmptySubset);
    }
    if set.is_full() {
        return Ok(IntervalDecomposition { d, intervals: vec![(0, d - 1)] });
    }
    let mut intervals = Vec::new();
    for a in set.members() {
        if set.contains((a + d - 1) % d) {
            continue;
        }
        let mut b = a;
        while set.contains((b + 1) % d) {
            b = (b + 1) % d;
        }
        intervals.push((a, b));
    }
    Ok(IntervalDecomposition { d, intervals })
}

fn p_pow(k: usize) -> ScalarP {
    ScalarP::p_pow(k)
}

/// `p^d + (−1)^s`.
pub fn denominator(d: usize, s: usize) -> ScalarP {
    let sign = if s % 2 == 0 { 1 } else { -1 };
    p_pow(d) + ScalarP::from_int(sign)
}

pub fn hilbert_ring(d: usize) -> Arc<RingPresentation> {
    RingPresentation::hilbert(d)
}

fn linear(pres: &Arc<RingPresentation>, d: usize, i: usize, j: usize, ci: ScalarP, cj: ScalarP) -> Element {
    Element::from_terms(pres, [(Monomial::var(d, i), ci), (Monomial::var(pres.ngens(), j), cj)]).expect("degree one")
}

/// `L_I`.
pub fn monomial_l(set: &CyclicSubset) -> Element {
    let pres = hilbert_ring(set.d());
    Element::monomial(&pres, set.monomial()).expect("square-free monomial")
}

/// `N_i = p l_i − l_{succ(i)}` for a successor map on indices.
fn n_single(pres: &Arc<RingPresentation>, i: usize, succ: usize) -> Element {
    linear(pres, pres.ngens(), i, succ, ScalarP::p(), ScalarP::from_int(-1))
}

fn p_single(pres: &Arc<RingPresentation>, i: usize, succ: usize) -> Element {
    linear(pres, pres.ngens(), i, succ, ScalarP::p(), ScalarP::one())
}

/// Block-cyclic successor for a partition of `d`.
pub fn block_successor(partition: &[usize]) -> Vec<usize> {
    let mut succ = Vec::new();
    let mut start = 0;
    for &len in partition {
        for k in 0..len {
            succ.push(start + (k + 1) % len);
        }
        start += len;
    }
    succ
}

/// `N_J`, the class of the stratum closure indexed by `J`.
pub fn strata_n(set: &CyclicSubset) -> Element {
    strata_n_blocks(&[set.d()], set).expect("single block")
}

pub fn strata_n_blocks(partition: &[usize], set: &CyclicSubset) -> Result<Element> {
    let succ = block_successor(partition);
    if succ.len() != set.d() {
        return Err(Error::OutOfRange("partition does not sum to d".into()));
    }
    let pres = hilbert_ring(set.d());
    set.members().iter().try_fold(Element::one(&pres), |acc, &i| acc.multiply(&n_single(&pres, i, succ[i])))
}

/// `P_I`.
pub fn positive_p(set: &CyclicSubset) -> Element {
    let pres = hilbert_ring(set.d());
    let d = set.d();
    set.members()
        .iter()
        .fold(Element::one(&pres), |acc, &i| acc.multiply(&p_single(&pres, i, (i + 1) % d)).expect("same ring"))
}

fn check_pair(i: &CyclicSubset, j: &CyclicSubset) -> Result<()> {
    if i.d() != j.d() {
        return Err(Error::OutOfRange(format!("moduli {} and {}", i.d(), j.d())));
    }
    if i.len() != j.len() {
        return Err(Error::CardinalityMismatch(i.len(), j.len()));
    }
    if i.is_empty() {
        return Err(Error::EmptySubset);
    }
    Ok(())
}

/// Exponent `e(I, J)`, or `None` when the coefficient vanishes. Requires `d >= 3`.
pub fn exponent_closed_form(i: &CyclicSubset, j: &CyclicSubset) -> Result<Option<usize>> {
    check_pair(i, j)?;
    let d = i.d();
    let jc = j.complement();
    if jc.is_empty() {
        return Ok(Some(0));
    }
    let dec = interval_decompose(&jc)?;
    let mut e = 0;
    for t in 0..dec.intervals.len() {
        let hit = dec.extended_set(t).intersection(i);
        if hit.len() != 1 {
            return Ok(None);
        }
        let a = dec.intervals[t].0;
        e += (hit.members()[0] + d - a) % d;
    }
    Ok(Some(e))
}

/// `a(I, J)` from the interval description of `J^c`.
pub fn coeff_closed_form(i: &CyclicSubset, j: &CyclicSubset) -> Result<ScalarP> {
    check_pair(i, j)?;
    let d = i.d();
    if d <= 2 {
        return Ok(expand_gauss(i)?.coeff(j));
    }
    if j.is_full() {
        return ScalarP::one().checked_div(&denominator(d, d)).ok_or(Error::DivisionByZero);
    }
    Ok(match exponent_closed_form(i, j)? {
        None => ScalarP::zero(),
        Some(e) => p_pow(e).checked_div(&denominator(d, i.len())).ok_or(Error::DivisionByZero)?,
    })
}

/// `a∨(J', I')`: the coefficient of `L_{I'}` in `P_{J'}`, from the interval expansion.
pub fn coeff_dual(ip: &CyclicSubset, jp: &CyclicSubset) -> Result<ScalarP> {
    check_pair(ip, jp)?;
    let d = ip.d();
    if d <= 2 {
        return Ok(positive_p(jp).coeff(&ip.monomial()));
    }
    if jp.is_full() {
        return Ok(p_pow(d) + ScalarP::one());
    }
    let dec = interval_decompose(jp)?;
    let mut e = 0;
    for t in 0..dec.intervals.len() {
        let missing = dec.extended_set(t).intersection(&ip.complement());
        if missing.len() != 1 {
            return Ok(ScalarP::zero());
        }
        let a = dec.intervals[t].0;
        e += (missing.members()[0] + d - a) % d;
    }
    Ok(p_pow(e))
}

/// Outcome of comparing both sign conventions of the reciprocity identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reciprocity {
    /// `(p^d + (−1)^{|I|}) a(I,J) = a∨(J^c, I^c)`.
    pub with_card_sign: bool,
    /// `(p^d + (−1)^d) a(I,J) = a∨(J^c, I^c)`.
    pub with_d_sign: bool,
}

pub fn reciprocity(i: &CyclicSubset, j: &CyclicSubset) -> Result<Reciprocity> {
    check_pair(i, j)?;
    let d = i.d();
    let a = coeff_closed_form(i, j)?;
    let dual = if j.is_full() { ScalarP::one() } else { coeff_dual(&i.complement(), &j.complement())? };
    Ok(Reciprocity {
        with_card_sign: &denominator(d, i.len()) * &a == dual,
        with_d_sign: &denominator(d, d) * &a == dual,
    })
}

/// The identity with the `(−1)^{|I|}` sign.
pub fn reciprocity_check(i: &CyclicSubset, j: &CyclicSubset) -> Result<bool> {
    Ok(reciprocity(i, j)?.with_card_sign)
}

/// `L_I = Σ_J a(I,J) N_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrataExpansion {
    pub source: CyclicSubset,
    /// Block sizes of the Frobenius orbits; `[d]` for the cyclic case.
    pub blocks: Vec<usize>,
    /// Nonzero coefficients only.
    pub coefficients: BTreeMap<CyclicSubset, ScalarP>,
}

impl StrataExpansion {
    pub fn coeff(&self, j: &CyclicSubset) -> ScalarP {
        self.coefficients.get(j).cloned().unwrap_or_else(ScalarP::zero)
    }

    /// Every coefficient is `>= 0` for every `p >= 2`.
    pub fn is_effective(&self) -> bool {
        self.coefficients.values().all(ScalarP::is_nonnegative)
    }

    /// `Σ_J a(I,J) N_J` in the ring.
    pub fn substitute(&self) -> Result<Element> {
        let pres = hilbert_ring(self.source.d());
        let mut acc = Element::zero(&pres);
        for (j, c) in &self.coefficients {
            acc = acc.try_add(&strata_n_blocks(&self.blocks, j)?.scale(c))?;
        }
        Ok(acc)
    }

    pub fn at_p(&self, p: i64) -> Result<BTreeMap<CyclicSubset, Rational>> {
        self.coefficients
            .iter()
            .map(|(j, c)| c.eval_int(p).map(|v| (*j, v)).ok_or(Error::DivisionByZero))
            .collect()
    }
}

fn trivial_expansion(i: &CyclicSubset, blocks: Vec<usize>) -> StrataExpansion {
    let mut coefficients = BTreeMap::new();
    coefficients.insert(*i, ScalarP::one());
    StrataExpansion { source: *i, blocks, coefficients }
}

/// Expansion by solving the linear system over `Q(p)` directly.
pub fn expand_gauss(i: &CyclicSubset) -> Result<StrataExpansion> {
    if i.is_empty() {
        return Ok(trivial_expansion(i, vec![i.d()]));
    }
    let subsets = CyclicSubset::all_of_size(i.d(), i.len());
    let classes: Vec<Element> = subsets.iter().map(strata_n).collect();
    let x = express_in_classes(&classes, &monomial_l(i))?;
    let coefficients = subsets.into_iter().zip(x).filter(|(_, c)| !c.is_zero()).collect();
    Ok(StrataExpansion { source: *i, blocks: vec![i.d()], coefficients })
}

/// Expansion from the closed form, over all `J` of the same size.
pub fn expand_closed(i: &CyclicSubset) -> Result<StrataExpansion> {
    if i.is_empty() {
        return Ok(trivial_expansion(i, vec![i.d()]));
    }
    if i.d() <= 2 {
        return expand_gauss(i);
    }
    let mut coefficients = BTreeMap::new();
    for j in CyclicSubset::all_of_size(i.d(), i.len()) {
        let c = coeff_closed_form(i, &j)?;
        if !c.is_zero() {
            coefficients.insert(j, c);
        }
    }
    Ok(StrataExpansion { source: *i, blocks: vec![i.d()], coefficients })
}

/// `l_i = Σ_m p^{d−m−1} N_{i+m} / (p^d − 1)`, from telescoping the sum.
pub fn codim_one_expansion(d: usize, i: usize) -> Result<StrataExpansion> {
    let source = CyclicSubset::new(d, &[i])?;
    let den = denominator(d, 1);
    let coefficients = (0..d)
        .map(|m| Ok((CyclicSubset::new(d, &[(i + m) % d])?, p_pow(d - m - 1) / den.clone())))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(StrataExpansion { source, blocks: vec![d], coefficients })
}

/// Expansion for A1^d with block-cyclic Frobenius: products of per-block expansions.
pub fn kunneth_expand(partition: &[usize], i: &CyclicSubset) -> Result<StrataExpansion> {
    let d: usize = partition.iter().sum();
    if d != i.d() || partition.contains(&0) {
        return Err(Error::OutOfRange(format!("partition {partition:?} of {}", i.d())));
    }
    let mut combined: Vec<(u64, ScalarP)> = vec![(0, ScalarP::one())];
    let mut start = 0;
    for &len in partition {
        let local_bits = (i.bits() >> start) & ((1u64 << len) - 1);
        let local = CyclicSubset::from_bits(len, local_bits);
        let block = expand_closed(&local)?;
        let mut next = Vec::new();
        for (bits, c) in &combined {
            for (j, a) in &block.coefficients {
                next.push((bits | (j.bits() << start), c * a));
            }
        }
        combined = next;
        start += len;
    }
    let coefficients = combined
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(b, c)| (CyclicSubset::from_bits(d, b), c))
        .collect();
    Ok(StrataExpansion { source: *i, blocks: partition.to_vec(), coefficients })
}

/// All `N_J` and `P_J` for one modulus, built by extending subsets one element at a time.
pub struct HilbertTables {
    pub d: usize,
    pub pres: Arc<RingPresentation>,
    n: Vec<Element>,
    p: Vec<Element>,
}

impl HilbertTables {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > 16 {
            return Err(Error::ResourceBound(format!("tables for d = {d}")));
        }
        let pres = hilbert_ring(d);
        let size = 1usize << d;
        let mut n = Vec::with_capacity(size);
        let mut p = Vec::with_capacity(size);
        n.push(Element::one(&pres));
        p.push(Element::one(&pres));
        for bits in 1..size {
            let low = bits & (bits - 1);
            let i = bits.trailing_zeros() as usize;
            let nn = n[low].multiply(&n_single(&pres, i, (i + 1) % d))?;
            let pp = p[low].multiply(&p_single(&pres, i, (i + 1) % d))?;
            n.push(nn);
            p.push(pp);
        }
        Ok(HilbertTables { d, pres, n, p })
    }

    pub fn n(&self, j: &CyclicSubset) -> &Element {
        &self.n[j.bits() as usize]
    }

    pub fn p(&self, i: &CyclicSubset) -> &Element {
        &self.p[i.bits() as usize]
    }

    /// `N_I · P_{J^c}` against `(p^d + (−1)^{|I|}) L_{Z/d}` on the diagonal and 0 off it.
    pub fn orthogonality(&self, i: &CyclicSubset, j: &CyclicSubset) -> Result<bool> {
        check_pair(i, j)?;
        let prod = self.n(i).multiply(self.p(&j.complement()))?;
        let expected = if i == j {
            Element::monomial(&self.pres, CyclicSubset::full(self.d).monomial())?.scale(&denominator(self.d, i.len()))
        } else {
            Element::zero(&self.pres)
        };
        Ok(prod == expected)
    }

    /// `P_{[a,b]} = Σ_{r=0}^{len} p^r L_{[a,b+1] ∖ {a+r}}` for the interval of length `len < d`
    /// starting at `a`, and `P_{Z/d} = (p^d + 1) L_{Z/d}`.
    pub fn interval_identity(&self, a: usize, len: usize) -> Result<bool> {
        let d = self.d;
        let set = CyclicSubset::interval(d, a, len);
        let mut expected = Element::zero(&self.pres);
        if len >= d {
            expected = Element::monomial(&self.pres, CyclicSubset::full(d).monomial())?.scale(&(p_pow(d) + ScalarP::one()));
        } else {
            let ext = CyclicSubset::interval(d, a, len + 1);
            for r in 0..=len {
                let mut bits = ext.bits();
                bits &= !(1u64 << ((a + r) % d));
                let m = CyclicSubset::from_bits(d, bits).monomial();
                expected = expected.try_add(&Element::monomial(&self.pres, m)?.scale(&p_pow(r)))?;
            }
        }
        Ok(*self.p(&set) == expected)
    }
}

/// Integer polynomial helpers for the series oracle.
fn ipoly_from_scalar(c: &ScalarP) -> Option<Vec<i128>> {
    if !c.is_polynomial() {
        return None;
    }
    c.numer()
        .coeffs()
        .iter()
        .map(|q| if q.is_integer() { q.to_integer().to_i128() } else { None })
        .collect()
}

fn ipoly_eval(poly: &[i128], x: i128) -> Option<i128> {
    poly.iter().rev().try_fold(0i128, |acc, &c| acc.checked_mul(x)?.checked_add(c))
}

fn poly_from_i128(v: &[i128]) -> PolyP {
    Poly::from_coeffs(v.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect())
}

fn poly_to_i128(p: &PolyP) -> Option<Vec<i128>> {
    p.coeffs()
        .iter()
        .map(|q| if q.is_integer() { q.to_integer().to_i128() } else { None })
        .collect()
}

/// Diagnostic data about the matrix `A_m` and its inversion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleReport {
    /// `A_m` at `p = 0` has exactly one `±1` in each row and column and zeros elsewhere.
    pub permutation_at_zero: bool,
    /// `det A_m(p0) ≠ 0` for `p0 ∈ {2,3,5,7}`.
    pub det_nonzero: Vec<(i64, bool)>,
}

/// The matrix `A_m` of the classes `N_J` in the basis `(L_K)`, `|J| = |K| = m`, over `Z[p]`.
pub struct OracleMatrix {
    pub d: usize,
    pub m: usize,
    pub subsets: Vec<CyclicSubset>,
    index: HashMap<u64, usize>,
    /// column `J` → list of `(row K, coefficients low→high)`.
    cols: Vec<Vec<(usize, Vec<i128>)>>,
    /// column `J` → `(row, sign)` of its unique entry at `p = 0`.
    perm: Option<Vec<(usize, i128)>>,
    maxdeg: usize,
}

impl OracleMatrix {
    pub fn build(tables: &HilbertTables, m: usize) -> Result<Self> {
        let d = tables.d;
        let subsets = CyclicSubset::all_of_size(d, m);
        let index: HashMap<u64, usize> = subsets.iter().enumerate().map(|(k, s)| (s.bits(), k)).collect();
        let mut cols = Vec::with_capacity(subsets.len());
        let mut maxdeg = 0;
        for j in &subsets {
            let mut col = Vec::new();
            for (mono, c) in tables.n(j).terms() {
                let k = CyclicSubset::from_monomial(mono).ok_or(Error::Singular)?;
                let poly = ipoly_from_scalar(c).ok_or_else(|| Error::OutOfRange("non-integral entry".into()))?;
                maxdeg = maxdeg.max(poly.len().saturating_sub(1));
                col.push((index[&k.bits()], poly));
            }
            col.sort_by_key(|e| e.0);
            cols.push(col);
        }
        let mut a = OracleMatrix { d, m, subsets, index, cols, perm: None, maxdeg };
        a.perm = a.signed_permutation_at_zero();
        Ok(a)
    }

    fn signed_permutation_at_zero(&self) -> Option<Vec<(usize, i128)>> {
        let r = self.subsets.len();
        let mut row_used = vec![false; r];
        let mut perm = Vec::with_capacity(r);
        for col in &self.cols {
            let nonzero: Vec<(usize, i128)> = col
                .iter()
                .filter_map(|(row, poly)| poly.first().copied().filter(|&c| c != 0).map(|c| (*row, c)))
                .collect();
            if nonzero.len() != 1 || nonzero[0].1.abs() != 1 || row_used[nonzero[0].0] {
                return None;
            }
            row_used[nonzero[0].0] = true;
            perm.push(nonzero[0]);
        }
        Some(perm)
    }

    pub fn is_signed_permutation_at_zero(&self) -> bool {
        self.perm.is_some()
    }

    /// Dense integer matrix at `p = p0`; `None` on overflow.
    pub fn eval_at(&self, p0: i64) -> Option<Vec<Vec<i64>>> {
        let r = self.subsets.len();
        let mut out = vec![vec![0i64; r]; r];
        for (j, col) in self.cols.iter().enumerate() {
            for (row, poly) in col {
                out[*row][j] = i64::try_from(ipoly_eval(poly, p0 as i128)?).ok()?;
            }
        }
        Some(out)
    }

    /// Nonvanishing of `det A_m(p0)`, certified modulo large primes.
    pub fn det_nonzero_at(&self, p0: i64) -> bool {
        let Some(a) = self.eval_at(p0) else {
            return false;
        };
        [2_305_843_009_213_693_951u64, 1_000_000_007, 998_244_353].iter().any(|&q| det_mod_prime(&a, q) != 0)
    }

    pub fn report(&self) -> OracleReport {
        OracleReport {
            permutation_at_zero: self.is_signed_permutation_at_zero(),
            det_nonzero: [2, 3, 5, 7].iter().map(|&p| (p, self.det_nonzero_at(p))).collect(),
        }
    }

    /// First `k_terms` coefficients of the p-adic expansion of column `target` of `A^{-1}`.
    fn series(&self, target: usize, k_terms: usize) -> Option<Vec<Vec<i128>>> {
        let perm = self.perm.as_ref()?;
        let r = self.subsets.len();
        let mut a = vec![vec![0i128; k_terms]; r];
        let mut nz: Vec<Vec<usize>> = Vec::with_capacity(k_terms);
        for k in 0..k_terms {
            let mut rhs = vec![0i128; r];
            if k == 0 {
                rhs[target] = 1;
            }
            for i in 1..=k.min(self.maxdeg) {
                for &j in &nz[k - i] {
                    let x = a[j][k - i];
                    for (row, poly) in &self.cols[j] {
                        if let Some(&c) = poly.get(i) {
                            if c != 0 {
                                rhs[*row] = rhs[*row].checked_sub(c.checked_mul(x)?)?;
                            }
                        }
                    }
                }
            }
            let mut nz_k = Vec::new();
            for j in 0..r {
                let (row, s) = perm[j];
                let v = rhs[row];
                if v != 0 {
                    a[j][k] = s * v;
                    nz_k.push(j);
                }
            }
            nz.push(nz_k);
        }
        Some(a)
    }

    /// Recover `x_J = num_J / den` from truncated series.
    fn reconstruct(series: &[Vec<i128>], k_terms: usize) -> Option<(PolyP, Vec<PolyP>)> {
        let bound = k_terms / 2;
        let polys: Vec<PolyP> = series.iter().map(|s| poly_from_i128(s)).collect();
        let first = polys.iter().position(|p| !p.is_zero())?;
        let (_, mut den) = polys[first].rational_reconstruction(k_terms, bound)?;
        'outer: for _ in 0..polys.len() + 1 {
            for s in &polys {
                if s.is_zero() {
                    continue;
                }
                let num = (s * &den).truncate(k_terms);
                if num.degree().is_some_and(|deg| deg >= bound) {
                    let (_, dj) = s.rational_reconstruction(k_terms, bound)?;
                    let g = den.gcd(&dj);
                    let l = (&den * &dj).div_rem(&g)?.0;
                    let c0 = l.coeff(0);
                    if c0.is_zero() {
                        return None;
                    }
                    den = l.scale(&c0.recip());
                    continue 'outer;
                }
            }
            let nums = polys.iter().map(|s| (s * &den).truncate(k_terms)).collect();
            return Some((den, nums));
        }
        None
    }

    /// Exact check of `Σ_J num_J · A[:,J] = den · e_target` over `Z[p]`, and again at small primes.
    fn certify(&self, target: usize, den: &PolyP, nums: &[PolyP]) -> bool {
        let (Some(den_i), Some(nums_i)) = (poly_to_i128(den), nums.iter().map(poly_to_i128).collect::<Option<Vec<_>>>()) else {
            return self.certify_rational(target, den, nums);
        };
        let r = self.subsets.len();
        let mut acc: Vec<Vec<i128>> = vec![Vec::new(); r];
        for (j, num) in nums_i.iter().enumerate() {
            if num.is_empty() {
                continue;
            }
            for (row, poly) in &self.cols[j] {
                let out = &mut acc[*row];
                let need = num.len() + poly.len() - 1;
                if out.len() < need {
                    out.resize(need, 0);
                }
                for (x, &a) in num.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    for (y, &b) in poly.iter().enumerate() {
                        let Some(v) = a.checked_mul(b).and_then(|v| out[x + y].checked_add(v)) else {
                            return self.certify_rational(target, den, nums);
                        };
                        out[x + y] = v;
                    }
                }
            }
        }
        for (row, poly) in acc.iter().enumerate() {
            let expected: &[i128] = if row == target { &den_i } else { &[] };
            let n = poly.len().max(expected.len());
            for k in 0..n {
                if poly.get(k).copied().unwrap_or(0) != expected.get(k).copied().unwrap_or(0) {
                    return false;
                }
            }
        }
        // the same identity at p0 ∈ {2, 3, 5, 7}
        for p0 in [2i128, 3, 5, 7] {
            let mut vals = vec![0i128; r];
            for (j, num) in nums_i.iter().enumerate() {
                if num.is_empty() {
                    continue;
                }
                let Some(x) = ipoly_eval(num, p0) else { return false };
                for (row, poly) in &self.cols[j] {
                    let Some(a) = ipoly_eval(poly, p0) else { return false };
                    let Some(v) = a.checked_mul(x).and_then(|v| vals[*row].checked_add(v)) else { return false };
                    vals[*row] = v;
                }
            }
            let Some(dv) = ipoly_eval(&den_i, p0) else { return false };
            if dv == 0 || vals.iter().enumerate().any(|(row, &v)| v != if row == target { dv } else { 0 }) {
                return false;
            }
        }
        true
    }

    fn certify_rational(&self, target: usize, den: &PolyP, nums: &[PolyP]) -> bool {
        let r = self.subsets.len();
        let mut acc = vec![PolyP::zero(); r];
        for (j, num) in nums.iter().enumerate() {
            if num.is_zero() {
                continue;
            }
            for (row, poly) in &self.cols[j] {
                acc[*row] = &acc[*row] + &(num * &poly_from_i128(poly));
            }
        }
        acc.iter().enumerate().all(|(row, v)| if row == target { v == den } else { v.is_zero() })
    }

    /// Column `target` of `A^{-1}` as exact rational functions.
    pub fn solve(&self, target: usize) -> Result<Vec<ScalarP>> {
        let mut k_terms = 2 * (self.d + 1) + 2;
        while k_terms <= 16 * (self.d + 1) {
            if let Some(series) = self.series(target, k_terms) {
                if let Some((den, nums)) = Self::reconstruct(&series, k_terms) {
                    if self.certify(target, &den, &nums) {
                        return Ok(nums.into_iter().map(|n| ScalarP::new(n, den.clone())).collect());
                    }
                }
            }
            k_terms *= 2;
        }
        self.solve_dense(target)
    }

    /// Gaussian elimination over `Q(p)`.
    pub fn solve_dense(&self, target: usize) -> Result<Vec<ScalarP>> {
        let r = self.subsets.len();
        let mut a = crate::linalg::Matrix::zeros(r, r);
        for (j, col) in self.cols.iter().enumerate() {
            for (row, poly) in col {
                a[(*row, j)] = ScalarP::from_poly(poly_from_i128(poly));
            }
        }
        let mut b = vec![ScalarP::zero(); r];
        b[target] = ScalarP::one();
        a.solve(&b)
    }

    pub fn row_of(&self, s: &CyclicSubset) -> Option<usize> {
        self.index.get(&s.bits()).copied()
    }
}

/// Exact expansion of every `L_I` for one modulus, by inverting `A_m`.
pub struct HilbertOracle {
    pub tables: HilbertTables,
    matrices: Vec<OracleMatrix>,
}

impl HilbertOracle {
    pub fn new(d: usize) -> Result<Self> {
        let tables = HilbertTables::new(d)?;
        let matrices = (0..=d).map(|m| OracleMatrix::build(&tables, m)).collect::<Result<_>>()?;
        Ok(HilbertOracle { tables, matrices })
    }

    pub fn matrix(&self, m: usize) -> &OracleMatrix {
        &self.matrices[m]
    }

    pub fn expand(&self, i: &CyclicSubset) -> Result<StrataExpansion> {
        if i.d() != self.tables.d {
            return Err(Error::OutOfRange(format!("subset of Z/{} for oracle of Z/{}", i.d(), self.tables.d)));
        }
        let a = &self.matrices[i.len()];
        if !a.is_signed_permutation_at_zero() {
            return Err(Error::Singular);
        }
        let target = a.row_of(i).ok_or(Error::Singular)?;
        let x = a.solve(target)?;
        let coefficients = a.subsets.iter().copied().zip(x).filter(|(_, c)| !c.is_zero()).collect();
        Ok(StrataExpansion { source: *i, blocks: vec![i.d()], coefficients })
    }
}

/// One-shot oracle expansion of `L_I`.
pub fn expand_oracle(i: &CyclicSubset) -> Result<StrataExpansion> {
    HilbertOracle::new(i.d())?.expand(i)
}

/// Ratio `num/den` evaluated in `f64`, for quick displays.
pub fn approx(c: &ScalarP, p: i64) -> Option<f64> {
    c.eval_int(p)?.to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_scalar;

    fn set(d: usize, m: &[usize]) -> CyclicSubset {
        CyclicSubset::new(d, m).unwrap()
    }

    #[test]
    fn subset_basics() {
        let s = set(5, &[1, 3]);
        assert_eq!(s.complement(), set(5, &[0, 2, 4]));
        assert_eq!(s.shift(3), set(5, &[1, 4]));
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(CyclicSubset::parse(5, "1,3").unwrap(), s);
        assert!(CyclicSubset::new(5, &[5]).is_err());
        let all = CyclicSubset::all_of_size(4, 2);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], set(4, &[0, 1]));
        assert_eq!(all[5], set(4, &[2, 3]));
    }

    #[test]
    fn interval_examples() {
        let dec = interval_decompose(&set(5, &[1, 2, 4])).unwrap();
        assert_eq!(dec.intervals, vec![(1, 2), (4, 4)]);
        let dec = interval_decompose(&set(4, &[3, 0])).unwrap();
        assert_eq!(dec.intervals, vec![(3, 0)]);
        let dec = interval_decompose(&CyclicSubset::full(6)).unwrap();
        assert_eq!(dec.intervals, vec![(0, 5)]);
        assert_eq!(interval_decompose(&CyclicSubset::empty(3)), Err(Error::EmptySubset));
    }

    #[test]
    fn ring_classes() {
        assert_eq!(monomial_l(&CyclicSubset::empty(3)).to_string(), "1 * 1");
        let n = strata_n(&set(2, &[0]));
        assert_eq!(n, hilbert_ring(2).parse("p*l0 - l1").unwrap());
        let n = strata_n(&set(3, &[0, 1]));
        assert_eq!(n, hilbert_ring(3).parse("p^2*l0*l1 - p*l0*l2 + l1*l2").unwrap());
        let p = positive_p(&set(3, &[0, 1]));
        assert_eq!(p, hilbert_ring(3).parse("p^2*l0*l1 + p*l0*l2 + l1*l2").unwrap());
        // N_1 at d = 1 is (p − 1) l_0
        assert_eq!(strata_n(&set(1, &[0])), hilbert_ring(1).parse("(p-1)*l0").unwrap());
    }

    #[test]
    fn difference_of_squares_vanishes() {
        for d in 2..=5 {
            for a in 0..1u64 << d {
                for b in 0..1u64 << d {
                    if a & b == 0 {
                        continue;
                    }
                    let prod = strata_n(&CyclicSubset::from_bits(d, a)).multiply(&positive_p(&CyclicSubset::from_bits(d, b))).unwrap();
                    assert!(prod.is_zero());
                }
            }
        }
    }

    fn brute_force(i: &CyclicSubset) -> StrataExpansion {
        expand_gauss(i).unwrap()
    }

    #[test]
    fn closed_form_worked_example() {
        let i = set(5, &[1, 3]);
        let expect = [
            (vec![1, 3], "p^3/(p^5+1)"),
            (vec![2, 3], "p^2/(p^5+1)"),
            (vec![1, 4], "p^2/(p^5+1)"),
            (vec![2, 4], "p/(p^5+1)"),
            (vec![0, 1], "p/(p^5+1)"),
            (vec![0, 2], "1/(p^5+1)"),
        ];
        let mut nonzero = 0;
        for j in CyclicSubset::all_of_size(5, 2) {
            let c = coeff_closed_form(&i, &j).unwrap();
            match expect.iter().find(|(m, _)| CyclicSubset::new(5, m).unwrap() == j) {
                Some((_, v)) => {
                    assert_eq!(c, parse_scalar(v).unwrap(), "{j}");
                    nonzero += 1;
                }
                None => assert!(c.is_zero(), "{j}: {c}"),
            }
        }
        assert_eq!(nonzero, 6);
        assert_eq!(brute_force(&i), expand_closed(&i).unwrap());
    }

    #[test]
    fn closed_form_matches_gaussian_elimination() {
        for d in 1..=6 {
            for bits in 1..1u64 << d {
                let i = CyclicSubset::from_bits(d, bits);
                let g = brute_force(&i);
                assert_eq!(expand_closed(&i).unwrap(), g, "I = {i}");
            }
        }
    }

    #[test]
    fn codim_one_formula() {
        for d in 1..=6 {
            for i in 0..d {
                let e = codim_one_expansion(d, i).unwrap();
                assert_eq!(e, brute_force(&set(d, &[i])), "d={d} i={i}");
                assert_eq!(e.substitute().unwrap(), monomial_l(&set(d, &[i])));
            }
        }
    }

    #[test]
    fn small_moduli_literal() {
        let i = set(1, &[0]);
        assert_eq!(coeff_closed_form(&i, &i).unwrap(), parse_scalar("1/(p-1)").unwrap());
        let i = set(3, &[0, 1, 2]);
        assert_eq!(coeff_closed_form(&i, &i).unwrap(), parse_scalar("1/(p^3-1)").unwrap());
    }

    #[test]
    fn oracle_matches_gauss() {
        for d in 1..=5 {
            let oracle = HilbertOracle::new(d).unwrap();
            for bits in 0..1u64 << d {
                let i = CyclicSubset::from_bits(d, bits);
                let e = oracle.expand(&i).unwrap();
                assert_eq!(e, brute_force(&i), "I = {i}");
                assert_eq!(e.substitute().unwrap(), monomial_l(&i));
            }
            for m in 0..=d {
                let r = oracle.matrix(m).report();
                assert!(r.permutation_at_zero);
                assert!(r.det_nonzero.iter().all(|x| x.1));
            }
        }
    }

    #[test]
    fn exponent_bounds() {
        for d in 3..=7 {
            for bits in 1..(1u64 << d) {
                let i = CyclicSubset::from_bits(d, bits);
                assert_eq!(exponent_closed_form(&i, &i).unwrap(), Some(d - i.len()));
                for j in CyclicSubset::all_of_size(d, i.len()) {
                    if j != i {
                        if let Some(e) = exponent_closed_form(&i, &j).unwrap() {
                            assert!(e < d - i.len(), "{i} {j}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dual_matches_ring_expansion() {
        for d in 1..=6 {
            for jb in 1..1u64 << d {
                let jp = CyclicSubset::from_bits(d, jb);
                let pj = positive_p(&jp);
                for ip in CyclicSubset::all_of_size(d, jp.len()) {
                    assert_eq!(coeff_dual(&ip, &jp).unwrap(), pj.coeff(&ip.monomial()), "{jp} {ip}");
                }
            }
        }
    }

    #[test]
    fn interval_identity_examples() {
        let i = set(7, &[2, 3, 4]);
        let ip = set(7, &[2, 4, 5]);
        assert_eq!(coeff_dual(&ip, &i).unwrap(), ScalarP::p());
        let a = set(7, &[3]);
        assert_eq!(coeff_dual(&set(7, &[4]), &a).unwrap(), ScalarP::one());
    }

    #[test]
    fn reciprocity_signs() {
        for d in 1..=6 {
            for ib in 1..1u64 << d {
                let i = CyclicSubset::from_bits(d, ib);
                for j in CyclicSubset::all_of_size(d, i.len()) {
                    let r = reciprocity(&i, &j).unwrap();
                    assert!(r.with_card_sign, "{i} {j}");
                    if (d - i.len()) % 2 == 0 {
                        assert!(r.with_d_sign);
                    }
                }
            }
        }
    }

    #[test]
    fn orthogonality_and_intervals() {
        for d in 1..=5 {
            let t = HilbertTables::new(d).unwrap();
            for ib in 1..1u64 << d {
                let i = CyclicSubset::from_bits(d, ib);
                for j in CyclicSubset::all_of_size(d, i.len()) {
                    assert!(t.orthogonality(&i, &j).unwrap(), "{i} {j}");
                }
            }
            for a in 0..d {
                for len in 1..=d {
                    assert!(t.interval_identity(a, len).unwrap(), "d={d} a={a} len={len}");
                }
            }
        }
    }

    #[test]
    fn kunneth_against_tensor_ring() {
        for partition in [vec![2, 3], vec![1, 1, 1], vec![3, 1]] {
            let d: usize = partition.iter().sum();
            // tensor presentation of the blocks, with block-cyclic strata classes
            let mut t = hilbert_ring(partition[0]);
            for &b in &partition[1..] {
                t = RingPresentation::tensor(&t, &hilbert_ring(b));
            }
            let succ = block_successor(&partition);
            for bits in 1..1u64 << d {
                let i = CyclicSubset::from_bits(d, bits);
                let k = kunneth_expand(&partition, &i).unwrap();
                let subsets = CyclicSubset::all_of_size(d, i.len());
                let classes: Vec<Element> = subsets
                    .iter()
                    .map(|j| {
                        j.members().iter().fold(Element::one(&t), |acc, &x| {
                            acc.multiply(&linear(&t, d, x, succ[x], ScalarP::p(), ScalarP::from_int(-1))).unwrap()
                        })
                    })
                    .collect();
                let target = Element::monomial(&t, i.monomial()).unwrap();
                let x = express_in_classes(&classes, &target).unwrap();
                for (j, c) in subsets.iter().zip(x) {
                    assert_eq!(k.coeff(j), c, "{partition:?} {i} {j}");
                }
                assert_eq!(k.substitute().unwrap(), monomial_l(&i));
            }
        }
        // split case: every block has d = 1
        let i = set(3, &[0, 2]);
        let k = kunneth_expand(&[1, 1, 1], &i).unwrap();
        assert_eq!(k.coefficients.len(), 1);
        assert_eq!(k.coeff(&i), parse_scalar("1/(p-1)^2").unwrap());
        assert_eq!(kunneth_expand(&[4], &set(4, &[1, 2])).unwrap(), expand_closed(&set(4, &[1, 2])).unwrap());
    }

    #[test]
    fn effectivity_verdict() {
        for d in 1..=6 {
            for bits in 1..1u64 << d {
                assert!(expand_closed(&CyclicSubset::from_bits(d, bits)).unwrap().is_effective());
            }
        }
    }

    #[test]
    fn cardinality_errors() {
        let i = set(4, &[0]);
        let j = set(4, &[0, 1]);
        assert_eq!(coeff_closed_form(&i, &j), Err(Error::CardinalityMismatch(1, 2)));
        assert_eq!(coeff_dual(&i, &j), Err(Error::CardinalityMismatch(1, 2)));
    }
}
