//! Chevalley's formula on the Schubert stack, section cones, and the twist `D_w`
//! carrying Schubert weights to partial Hasse invariant weights.
//!
//! Characters here are raw lattice vectors. In type A1^d the Hodge line bundles have
//! weights `−e_i`, so a Hodge-convention weight `k` corresponds to the character `−k`
//! (see [`from_hodge`]).

use num_traits::{One, Zero};

use crate::azip::CyclicSubset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::weyl::{Character, Root, RootDatum, WeylElement};
use crate::ScalarP;

/// Which power of Frobenius enters `D_w`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrobeniusTwist {
    /// `λ ↦ λ − p σ⁻¹(z w⁻¹ λ)`.
    #[default]
    Inverse,
    /// The historical variant with `σ` in place of `σ⁻¹`.
    Forward,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorTerm {
    pub root: Root,
    /// `w s_α`.
    pub target: WeylElement,
    pub coefficient: ScalarP,
}

/// `−Σ_{α ∈ E_w} ⟨λ, wα∨⟩ [Sbt_{w s_α}]`; every `α ∈ E_w` is listed, zero or not.
#[derive(Clone, Debug, PartialEq)]
pub struct ChevalleyDivisor {
    pub base: WeylElement,
    pub terms: Vec<DivisorTerm>,
}

impl ChevalleyDivisor {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_zero())
    }

    pub fn support(&self) -> Vec<&DivisorTerm> {
        self.terms.iter().filter(|t| !t.coefficient.is_zero()).collect()
    }

    /// All coefficients are `>= 0` (for every `p >= 2` when they depend on `p`).
    pub fn is_effective(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_nonnegative())
    }

    pub fn coefficient_at(&self, target: &WeylElement) -> ScalarP {
        self.terms
            .iter()
            .find(|t| t.target == *target)
            .map_or_else(ScalarP::zero, |t| t.coefficient.clone())
    }
}

fn pair(chi: &[ScalarP], coroot: &[i64]) -> ScalarP {
    chi.iter()
        .zip(coroot)
        .filter(|(_, &c)| c != 0)
        .fold(ScalarP::zero(), |acc, (x, &c)| acc + x * &ScalarP::from_int(c))
}

pub fn to_scalars(lambda: &Character) -> Vec<ScalarP> {
    lambda.coords.iter().cloned().map(ScalarP::constant).collect()
}

/// Cycle class of the zero scheme of a section of weight `chi` on the closure of the `w`
/// stratum, as a combination of the codimension-one strata `w s_α`.
pub fn divisor_class_on_stratum(datum: &RootDatum, w: &WeylElement, chi: &[ScalarP]) -> ChevalleyDivisor {
    let terms = datum
        .lower_neighbours(w)
        .into_iter()
        .map(|(root, target)| {
            let coefficient = -pair(chi, &w.apply_coroot(&root.coroot));
            DivisorTerm { root, target, coefficient }
        })
        .collect();
    ChevalleyDivisor { base: w.clone(), terms }
}

pub fn chevalley_divisor(datum: &RootDatum, w: &WeylElement, lambda: &Character) -> ChevalleyDivisor {
    divisor_class_on_stratum(datum, w, &to_scalars(lambda))
}

/// `H⁰(Sbt_w, M_w(λ)) ≠ 0`, i.e. `⟨λ, wα∨⟩ <= 0` for every `α ∈ E_w`.
pub fn sbt_cone_contains(datum: &RootDatum, w: &WeylElement, lambda: &Character) -> bool {
    chevalley_divisor(datum, w, lambda).is_effective()
}

/// Integer characters in `[-bound, bound]^n` whose divisor on the `w` stratum is a
/// positive multiple of a single `[Sbt_{w s_α}]`, grouped by that target.
pub fn concentrating_labels(datum: &RootDatum, w: &WeylElement, bound: i64) -> Vec<(WeylElement, Vec<Character>)> {
    let neighbours = datum.lower_neighbours(w);
    let mut found: Vec<(WeylElement, Vec<Character>)> = neighbours.iter().map(|(_, t)| (t.clone(), Vec::new())).collect();
    let coroots: Vec<Vec<i64>> = neighbours.iter().map(|(r, _)| w.apply_coroot(&r.coroot)).collect();
    let n = datum.dim();
    let mut x = vec![-bound; n];
    loop {
        let coeffs: Vec<i64> = coroots.iter().map(|c| -crate::weyl::dot(&x, c)).collect();
        let support: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k] != 0).collect();
        if let [k] = support[..] {
            if coeffs[k] > 0 {
                found[k].1.push(Character::from_ints(&x));
            }
        }
        let Some(i) = (0..n).find(|&i| x[i] < bound) else { break };
        x[i] += 1;
        x[..i].iter_mut().for_each(|v| *v = -bound);
    }
    found
}

fn mat_mul(n: usize, a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x != 0 {
                for j in 0..n {
                    out[i * n + j] += x * b[k * n + j];
                }
            }
        }
    }
    out
}

fn identity(n: usize) -> Vec<i64> {
    let mut m = vec![0; n * n];
    for i in 0..n {
        m[i * n + i] = 1;
    }
    m
}

/// Inverse of the Frobenius matrix, found as its last power before the identity.
fn frobenius_inverse(datum: &RootDatum) -> Vec<i64> {
    let n = datum.dim();
    let f = datum.frobenius();
    let id = identity(n);
    let mut prev = id.clone();
    let mut power = f.to_vec();
    while power != id {
        prev = power.clone();
        power = mat_mul(n, &power, f);
    }
    prev
}

/// `z = σ(w_{0,I}) w₀` for the Levi type `I`.
pub fn default_z(datum: &RootDatum, levi: &[usize]) -> WeylElement {
    let w0i = datum.longest_in(levi);
    datum.mul_reduced(&datum.frobenius_conjugate(&w0i), &datum.longest())
}

/// The integer matrix `τ · z · w⁻¹` with `τ = σ⁻¹` or `σ`.
pub fn twist_matrix(datum: &RootDatum, w: &WeylElement, z: &WeylElement, twist: FrobeniusTwist) -> Vec<i64> {
    let n = datum.dim();
    let tau = match twist {
        FrobeniusTwist::Inverse => frobenius_inverse(datum),
        FrobeniusTwist::Forward => datum.frobenius().to_vec(),
    };
    let zw = datum.mul(z, &datum.inverse(w));
    mat_mul(n, &tau, zw.matrix())
}

/// `D_w = 1 − p · τ z w⁻¹` as a matrix over `Q(p)`.
pub fn dw_matrix(datum: &RootDatum, w: &WeylElement, z: &WeylElement, p: &ScalarP, twist: FrobeniusTwist) -> Matrix<ScalarP> {
    let n = datum.dim();
    let m = twist_matrix(datum, w, z, twist);
    let mut out = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let x = m[i * n + j];
            if x != 0 {
                out[(i, j)] = &out[(i, j)] - &(p * &ScalarP::from_int(x));
            }
        }
    }
    out
}

/// `D_w(χ) = χ − p σ⁻¹(z w⁻¹ χ)`.
pub fn dw_map(datum: &RootDatum, w: &WeylElement, z: &WeylElement, p: &ScalarP, chi: &[ScalarP]) -> Vec<ScalarP> {
    dw_matrix(datum, w, z, p, FrobeniusTwist::Inverse).mul_vec(chi)
}

#[derive(Clone, Debug)]
pub struct ConeQuery {
    pub w: WeylElement,
    pub lambda: Vec<ScalarP>,
    /// A constant for a numeric prime, or `ScalarP::p()` for symbolic `p`.
    pub p: ScalarP,
    pub levi: Vec<usize>,
    /// Overrides [`default_z`].
    pub z: Option<WeylElement>,
    pub twist: FrobeniusTwist,
}

impl ConeQuery {
    pub fn new(w: WeylElement, lambda: Vec<ScalarP>, p: ScalarP) -> Self {
        ConeQuery { w, lambda, p, levi: Vec::new(), z: None, twist: FrobeniusTwist::Inverse }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaVerdict {
    pub contains: bool,
    /// `χ = D_w⁻¹(λ)`.
    pub witness: Vec<ScalarP>,
    pub divisor: ChevalleyDivisor,
}

/// `λ ∈ C_{pHa,w} = D_w(C_{Sbt,w})`. Only signs of pairings matter, so positive
/// multiples are absorbed.
pub fn pha_cone_contains(datum: &RootDatum, q: &ConeQuery) -> Result<PhaVerdict> {
    if q.lambda.len() != datum.dim() {
        return Err(Error::OutOfRange(format!("character of length {} for lattice of rank {}", q.lambda.len(), datum.dim())));
    }
    let z = q.z.clone().unwrap_or_else(|| default_z(datum, &q.levi));
    let d = dw_matrix(datum, &q.w, &z, &q.p, q.twist);
    let witness = d.solve(&q.lambda)?;
    let divisor = divisor_class_on_stratum(datum, &q.w, &witness);
    Ok(PhaVerdict { contains: divisor.is_effective(), witness, divisor })
}

/// Hodge-convention weights to characters: `k ↦ −k`.
pub fn from_hodge(k: &[ScalarP]) -> Vec<ScalarP> {
    k.iter().map(|x| -x.clone()).collect()
}

/// The Weyl element of type A1^d attached to a stratum label `I`: reflections at `I + 1`.
pub fn hilbert_stratum_element(datum: &RootDatum, label: &CyclicSubset) -> Result<WeylElement> {
    if datum.rank() != label.d() {
        return Err(Error::OutOfRange(format!("label in Z/{} for rank {}", label.d(), datum.rank())));
    }
    datum.from_word(&label.shift(1).members())
}

/// Columns `α₀ = p e₀ + e₁`, `α₁ = p e₁ − e₂`, `α₂ = p e₂ − e₀`.
pub fn hilbert_inert_matrix(p: &ScalarP) -> Matrix<ScalarP> {
    let (o, z, m) = (ScalarP::one(), ScalarP::zero(), -ScalarP::one());
    Matrix::from_rows(vec![
        vec![p.clone(), z.clone(), m.clone()],
        vec![o, p.clone(), z.clone()],
        vec![z, m, p.clone()],
    ])
}

/// `(p³ + 1)` times the inverse of [`hilbert_inert_matrix`].
pub fn hilbert_inert_adjugate(p: &ScalarP) -> Matrix<ScalarP> {
    let p2 = p * p;
    let (o, m) = (ScalarP::one(), -ScalarP::one());
    Matrix::from_rows(vec![
        vec![p2.clone(), o.clone(), p.clone()],
        vec![-p.clone(), p2.clone(), m.clone()],
        vec![m, p.clone(), p2],
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertInert {
    /// Coordinates of `k` in the basis `(α₀, α₁, α₂)`.
    pub m: Vec<ScalarP>,
    /// `m₁ >= 0` and `m₂ >= 0`.
    pub in_pha: bool,
    /// `p k₀ > k₂`, `p k₁ > k₀` and `p k₂ > k₁`.
    pub ample: bool,
}

/// Cone test on the stratum `{1,2}` of the inert Hilbert threefold, with Hodge weights `k`.
pub fn hilbert_inert_cone(k: &[ScalarP], p: &ScalarP) -> Result<HilbertInert> {
    if k.len() != 3 {
        return Err(Error::OutOfRange(format!("expected 3 weights, got {}", k.len())));
    }
    let m = hilbert_inert_matrix(p).solve(k)?;
    let in_pha = m[1].is_nonnegative() && m[2].is_nonnegative();
    let ample = (0..3).all(|i| (p * &k[i] - k[(i + 2) % 3].clone()).is_positive());
    Ok(HilbertInert { m, in_pha, ample })
}
