//! Generically ordinary curves against strata-effective curve classes.

use std::sync::Arc;

use num_traits::Zero;

use crate::azip::{self, CyclicSubset};
use crate::linalg::{simplex, LpOutcome, Matrix};
use crate::ring::{express_in_classes, Element, Monomial, RingPresentation};
use crate::scalar::int;
use crate::strata::fixture::{Diagram, DiagramFixture};
use crate::{Error, Rational, Result, ScalarP};

/// Linear data deciding, for a curve class `Σ x_i b_i`, ordinarity (pairing with the
/// partial Hasse weights at the open stratum), nefness and strata-effectivity.
#[derive(Clone, Debug)]
pub struct CurveCriteria {
    pub name: String,
    pub ring: Arc<RingPresentation>,
    /// Curve classes are `Σ x_i basis[i]`.
    pub basis: Vec<Element>,
    pub top: Monomial,
    pub generators: Vec<Element>,
    pub nef: Option<Element>,
    pub strata: Vec<Element>,
    /// `pairing[k][i]`: degree of `generators[k] · basis[i]`.
    pub pairing: Vec<Vec<ScalarP>>,
    pub nef_pairing: Option<Vec<ScalarP>>,
    /// `coordinates[j][i]`: coefficient of `strata[j]` in `basis[i]`.
    pub coordinates: Vec<Vec<ScalarP>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveVerdict {
    pub constraints: Vec<ScalarP>,
    pub ordinary: bool,
    pub nef_value: Option<ScalarP>,
    pub strata_coordinates: Vec<ScalarP>,
    pub strata_effective: bool,
}

impl CurveVerdict {
    /// Ordinary implies strata-effective.
    pub fn implication_holds(&self) -> bool {
        !self.ordinary || self.strata_effective
    }

    /// Ordinary and nef implies strata-effective.
    pub fn implication_with_nef_holds(&self) -> bool {
        let nef = self.nef_value.as_ref().is_none_or(|v| v.is_nonnegative());
        !(self.ordinary && nef) || self.strata_effective
    }
}

impl CurveCriteria {
    fn build(
        name: &str,
        ring: Arc<RingPresentation>,
        basis: Vec<Element>,
        top: Monomial,
        generators: Vec<Element>,
        nef: Option<Element>,
        strata: Vec<Element>,
    ) -> Result<Self> {
        let degree = |x: &Element| -> Result<Vec<ScalarP>> {
            basis
                .iter()
                .map(|b| Ok(x.multiply(b)?.coeff(&top)))
                .collect()
        };
        let pairing = generators.iter().map(&degree).collect::<Result<Vec<_>>>()?;
        let nef_pairing = nef.as_ref().map(&degree).transpose()?;
        let mut s = Matrix::zeros(basis.len(), strata.len());
        for (j, c) in strata.iter().enumerate() {
            let col = express_in_classes(&basis, c)?;
            for (i, v) in col.into_iter().enumerate() {
                s[(i, j)] = v;
            }
        }
        let inv = s.inverse()?;
        let coordinates = (0..strata.len()).map(|j| inv.row(j).to_vec()).collect();
        Ok(CurveCriteria {
            name: name.into(),
            ring,
            basis,
            top,
            generators,
            nef,
            strata,
            pairing,
            nef_pairing,
            coordinates,
        })
    }

    fn from_diagram(fixture: &DiagramFixture, basis: &[&str], nef: Option<&str>) -> Result<Self> {
        let dg = Diagram::new(fixture)?;
        let ring = dg.ring.clone();
        let open = dg.of_length(dg.max_length());
        let open = open.first().ok_or_else(|| Error::MissingTableEntry("open stratum".into()))?;
        let generators = fixture
            .children(open)
            .iter()
            .map(|e| ring.parse(&e.label))
            .collect::<Result<Vec<_>>>()?;
        let strata = dg.of_length(1).iter().map(|id| dg.class(id).cloned()).collect::<Result<Vec<_>>>()?;
        let basis = basis.iter().map(|b| ring.parse(b)).collect::<Result<Vec<_>>>()?;
        let nef = nef.map(|s| ring.parse(s)).transpose()?;
        Self::build(&fixture.name, ring, basis, dg.top.clone(), generators, nef, strata)
    }

    /// Curve classes `a l1²l2 + b l1l2²` on the C2 flag space.
    pub fn c2() -> Result<Self> {
        Self::from_diagram(&DiagramFixture::c2(), &["l1^2*l2", "l1*l2^2"], None)
    }

    /// Curve classes `a l1l2 + b l2²` on the unitary A2 flag space; nef means
    /// nonnegative degree of `2(l1 + l2)`.
    pub fn a2_unitary() -> Result<Self> {
        Self::from_diagram(&DiagramFixture::a2_unitary(), &["l1*l2", "l2^2"], Some("2*(l1+l2)"))
    }

    pub fn a2_split() -> Result<Self> {
        Self::from_diagram(&DiagramFixture::a2_split(), &["l1*l2", "l2^2"], Some("2*(l1+l2)"))
    }

    /// Curve classes `Σ a_i L_{Z/d∖{i}}` on the Hilbert flag space; the partial Hasse
    /// weights are the classes of the codimension-one strata.
    pub fn hilbert(d: usize) -> Result<Self> {
        if d == 0 || d > azip::MAX_MODULUS {
            return Err(Error::OutOfRange(format!("d = {d}")));
        }
        let ring = RingPresentation::hilbert(d);
        let full = CyclicSubset::full(d);
        let singletons = (0..d).map(|i| CyclicSubset::new(d, &[i])).collect::<Result<Vec<_>>>()?;
        let basis: Vec<Element> = singletons.iter().map(|s| azip::monomial_l(&s.complement())).collect();
        let generators = singletons.iter().map(azip::strata_n).collect();
        let strata = singletons.iter().map(|s| azip::strata_n(&s.complement())).collect();
        Self::build(&format!("A1^{d}"), ring, basis, full.monomial(), generators, None, strata)
    }

    fn eval_vec(v: &[ScalarP], p: &ScalarP) -> Result<Vec<ScalarP>> {
        v.iter().map(|c| substitute(c, p)).collect()
    }

    /// Specialise every precomputed entry at `p`, which may itself be `ScalarP::p()`.
    pub fn at(&self, p: &ScalarP) -> Result<CurveCriteriaAt> {
        Ok(CurveCriteriaAt {
            pairing: self.pairing.iter().map(|r| Self::eval_vec(r, p)).collect::<Result<_>>()?,
            nef_pairing: self.nef_pairing.as_ref().map(|r| Self::eval_vec(r, p)).transpose()?,
            coordinates: self.coordinates.iter().map(|r| Self::eval_vec(r, p)).collect::<Result<_>>()?,
        })
    }

    pub fn verdict(&self, x: &[ScalarP], p: &ScalarP) -> Result<CurveVerdict> {
        self.at(p)?.verdict(x)
    }
}

/// Precomputed criteria at a fixed value of `p`.
#[derive(Clone, Debug)]
pub struct CurveCriteriaAt {
    pub pairing: Vec<Vec<ScalarP>>,
    pub nef_pairing: Option<Vec<ScalarP>>,
    pub coordinates: Vec<Vec<ScalarP>>,
}

fn dot(a: &[ScalarP], b: &[ScalarP]) -> ScalarP {
    a.iter().zip(b).fold(ScalarP::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

impl CurveCriteriaAt {
    pub fn verdict(&self, x: &[ScalarP]) -> Result<CurveVerdict> {
        if x.len() != self.coordinates.len() {
            return Err(Error::OutOfRange(format!("expected {} curve coordinates", self.coordinates.len())));
        }
        let constraints: Vec<ScalarP> = self.pairing.iter().map(|r| dot(r, x)).collect();
        let strata_coordinates: Vec<ScalarP> = self.coordinates.iter().map(|r| dot(r, x)).collect();
        Ok(CurveVerdict {
            ordinary: constraints.iter().all(|c| c.is_nonnegative()),
            nef_value: self.nef_pairing.as_ref().map(|r| dot(r, x)),
            strata_effective: strata_coordinates.iter().all(|c| c.is_nonnegative()),
            constraints,
            strata_coordinates,
        })
    }
}

/// `c(p)` evaluated at `p = value`.
pub fn substitute(c: &ScalarP, value: &ScalarP) -> Result<ScalarP> {
    c.eval_in(value, |q: &Rational| ScalarP::constant(q.clone())).ok_or(Error::DivisionByZero)
}

pub fn curve_cone_c2(a: &ScalarP, b: &ScalarP, p: &ScalarP) -> Result<CurveVerdict> {
    CurveCriteria::c2()?.verdict(&[a.clone(), b.clone()], p)
}

pub fn curve_cone_a2u(a: &ScalarP, b: &ScalarP, p: &ScalarP) -> Result<CurveVerdict> {
    CurveCriteria::a2_unitary()?.verdict(&[a.clone(), b.clone()], p)
}

/// `a[i]` is the coefficient of `L_{Z/d∖{i}}`.
pub fn curve_cone_a1d(a: &[ScalarP], p: &ScalarP) -> Result<CurveVerdict> {
    CurveCriteria::hilbert(a.len())?.verdict(a, p)
}

/// The unitary A2 matrix `M` with `([Y_(12)], [Y_(23)])ᵀ = M (l1l2, l2²)ᵀ`.
pub fn a2u_matrix() -> Result<Matrix<ScalarP>> {
    let c = CurveCriteria::a2_unitary()?;
    let rows = c
        .strata
        .iter()
        .map(|s| express_in_classes(&c.basis, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DualConeOutcome {
    /// Every class pairing nonnegatively with the generators is strata-effective.
    Holds,
    /// A class in the dual cone with a negative strata coordinate.
    Fails { witness: Vec<Rational>, stratum: usize },
}

/// Decide `{x : g·x ≥ 0 for all generators} ⊆ cone(strata)` at a numeric `p` by one
/// linear program per stratum coordinate.
pub fn dual_cone_check(criteria: &CurveCriteria, p: i64, with_nef: bool) -> Result<DualConeOutcome> {
    let at = criteria.at(&ScalarP::from_int(p))?;
    let num = |c: &ScalarP| c.as_constant().ok_or(Error::DivisionByZero);
    let mut rows: Vec<Vec<Rational>> =
        at.pairing.iter().map(|r| r.iter().map(num).collect()).collect::<Result<_>>()?;
    if with_nef {
        if let Some(r) = &at.nef_pairing {
            rows.push(r.iter().map(num).collect::<Result<_>>()?);
        }
    }
    let n = criteria.basis.len();
    let k = rows.len();
    for (j, f) in at.coordinates.iter().enumerate() {
        let f: Vec<Rational> = f.iter().map(num).collect::<Result<_>>()?;
        // variables: u (n), v (n), slacks for the k cone rows, slack for f(x) >= -1
        let cols = 2 * n + k + 1;
        let mut a = Matrix::zeros(k + 1, cols);
        let mut b = vec![int(0); k + 1];
        for (r, g) in rows.iter().enumerate() {
            for i in 0..n {
                a[(r, i)] = g[i].clone();
                a[(r, n + i)] = -g[i].clone();
            }
            a[(r, 2 * n + r)] = int(-1);
        }
        for i in 0..n {
            a[(k, i)] = f[i].clone();
            a[(k, n + i)] = -f[i].clone();
        }
        a[(k, 2 * n + k)] = int(-1);
        b[k] = int(-1);
        let mut c = vec![int(0); cols];
        for i in 0..n {
            c[i] = -f[i].clone();
            c[n + i] = f[i].clone();
        }
        match simplex(&a, &b, &c) {
            LpOutcome::Optimal { x, value } => {
                if value > int(0) {
                    let witness = (0..n).map(|i| x[i].clone() - x[n + i].clone()).collect();
                    return Ok(DualConeOutcome::Fails { witness, stratum: j });
                }
            }
            LpOutcome::Infeasible => return Err(Error::Infeasible),
            LpOutcome::Unbounded => return Err(Error::Unbounded),
        }
    }
    Ok(DualConeOutcome::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn s(n: i64) -> ScalarP {
        ScalarP::from_int(n)
    }

    fn q(n: i64, d: i64) -> ScalarP {
        ScalarP::from_rational_value(rat(n, d))
    }

    #[test]
    fn c2_constraints_have_the_expected_signs() {
        let c = CurveCriteria::c2().unwrap();
        let p = ScalarP::p();
        let a = ScalarP::parse("p+3").unwrap();
        let b = ScalarP::parse("2*p-1").unwrap();
        let v = c.verdict(&[a.clone(), b.clone()], &p).unwrap();
        // up to positive factors: b p + a and b − a
        let want = [b.clone() * p.clone() + a.clone(), b.clone() - a.clone()];
        for w in &want {
            assert!(v.constraints.iter().any(|x| (x.clone() / w.clone()).is_positive()), "{w}");
        }
        let want = [b.clone() * p.clone() - a.clone(), b - a];
        for w in want {
            assert!(v.strata_coordinates.iter().any(|x| (x.clone() / w.clone()).is_positive()), "{w}");
        }
    }

    #[test]
    fn c2_implication_by_cases() {
        // adding the constraints gives b(p+1) ≥ 0, and bp − a = (b − a) + b(p − 1)
        let c = CurveCriteria::c2().unwrap();
        for p in [2, 3, 5, 7] {
            let at = c.at(&s(p)).unwrap();
            for a in -6..=6 {
                for b in -6..=6 {
                    let v = at.verdict(&[q(a, 3), q(b, 2)]).unwrap();
                    assert!(v.implication_holds(), "p={p} a={a}/3 b={b}/2");
                }
            }
        }
    }

    #[test]
    fn a2u_matrix_and_inverse() {
        let m = a2u_matrix().unwrap();
        let p = ScalarP::p();
        let want = Matrix::from_rows(vec![
            vec![ScalarP::parse("p^2-p+1").unwrap(), s(0)],
            vec![ScalarP::parse("-(p+1)").unwrap(), ScalarP::parse("(p+1)*(p-1)").unwrap()],
        ]);
        assert_eq!(m, want);
        let inv = m.transpose().inverse().unwrap();
        let det = ScalarP::parse("(p^2-p+1)*(p^2-1)").unwrap();
        let printed = Matrix::from_rows(vec![
            vec![ScalarP::parse("p^2-1").unwrap(), p.clone() + s(1)],
            vec![s(0), ScalarP::parse("p^2-p+1").unwrap()],
        ])
        .scale(&(s(1) / det));
        assert_eq!(inv, printed);
    }

    #[test]
    fn a2u_witness_is_ordinary_but_not_effective() {
        let c = CurveCriteria::a2_unitary().unwrap();
        let p = ScalarP::p();
        let v = c.verdict(&[p.clone(), s(-1)], &p).unwrap();
        assert!(v.ordinary);
        assert!(!v.strata_effective);
        assert!(!v.implication_holds());
        assert!(!v.nef_value.unwrap().is_nonnegative());
    }

    #[test]
    fn a2u_nef_rescues_the_implication() {
        let c = CurveCriteria::a2_unitary().unwrap();
        for p in [2, 3, 5] {
            let at = c.at(&s(p)).unwrap();
            for a in -8..=8 {
                for b in -8..=8 {
                    let v = at.verdict(&[q(a, 2), q(b, 3)]).unwrap();
                    assert!(v.implication_with_nef_holds(), "p={p} a={a}/2 b={b}/3");
                    // effective exactly when (p−1)a + b ≥ 0 and b ≥ 0
                    let ra = rat(a, 2);
                    let rb = rat(b, 3);
                    let expect = int(p - 1) * ra + rb.clone() >= int(0) && rb >= int(0);
                    assert_eq!(v.strata_effective, expect);
                }
            }
        }
    }

    #[test]
    fn dual_cone_verdicts() {
        for p in [2, 3, 5] {
            assert_eq!(dual_cone_check(&CurveCriteria::c2().unwrap(), p, false).unwrap(), DualConeOutcome::Holds);
            let u = CurveCriteria::a2_unitary().unwrap();
            assert!(matches!(dual_cone_check(&u, p, false).unwrap(), DualConeOutcome::Fails { .. }));
            assert_eq!(dual_cone_check(&u, p, true).unwrap(), DualConeOutcome::Holds);
            for d in 1..=4 {
                let h = CurveCriteria::hilbert(d).unwrap();
                assert_eq!(dual_cone_check(&h, p, false).unwrap(), DualConeOutcome::Holds, "d={d}");
            }
        }
    }

    #[test]
    fn a2_split_is_not_decided_by_nefness() {
        let c = CurveCriteria::a2_split().unwrap();
        for p in [2, 3, 5] {
            let DualConeOutcome::Fails { witness, .. } = dual_cone_check(&c, p, true).unwrap() else {
                panic!("p={p}: the split case should not be certified")
            };
            let x: Vec<ScalarP> = witness.iter().map(|w| ScalarP::from_rational_value(w.clone())).collect();
            let v = c.verdict(&x, &s(p)).unwrap();
            assert!(v.ordinary && v.nef_value.unwrap().is_nonnegative() && !v.strata_effective);
        }
    }

    #[test]
    fn dual_cone_witness_violates_a_stratum() {
        let u = CurveCriteria::a2_unitary().unwrap();
        let DualConeOutcome::Fails { witness, stratum } = dual_cone_check(&u, 3, false).unwrap() else {
            panic!("expected a failure")
        };
        let x: Vec<ScalarP> = witness.iter().map(|w| ScalarP::from_rational_value(w.clone())).collect();
        let v = u.verdict(&x, &s(3)).unwrap();
        assert!(v.ordinary);
        assert!(v.strata_coordinates[stratum].as_constant().unwrap() < int(0));
    }

    #[test]
    fn hilbert_constraints_and_strata() {
        let p = ScalarP::p();
        for d in 2..=4 {
            let c = CurveCriteria::hilbert(d).unwrap();
            // the weight N_j pairs with the curve as p a_j − a_{j+1}, up to a positive factor
            let a: Vec<ScalarP> = (0..d).map(|i| s(i as i64 + 1)).collect();
            let v = c.verdict(&a, &p).unwrap();
            for j in 0..d {
                let want = p.clone() * a[j].clone() - a[(j + 1) % d].clone();
                let got = &v.constraints[j];
                assert!(got.is_zero() == want.is_zero());
                assert!((got.clone() / want).is_positive(), "d={d} j={j}: {got}");
            }
            assert!(v.ordinary && v.strata_effective);
        }
    }

    #[test]
    fn hilbert_implication_on_a_grid() {
        for d in 2..=3 {
            let c = CurveCriteria::hilbert(d).unwrap();
            for p in [2, 3] {
                let at = c.at(&s(p)).unwrap();
                let range: Vec<i64> = (-3..=3).collect();
                let mut idx = vec![0usize; d];
                loop {
                    let a: Vec<ScalarP> = idx.iter().map(|&i| s(range[i])).collect();
                    assert!(at.verdict(&a).unwrap().implication_holds());
                    let mut k = 0;
                    while k < d {
                        idx[k] += 1;
                        if idx[k] < range.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == d {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_arity_is_an_error() {
        let c = CurveCriteria::c2().unwrap();
        assert!(c.verdict(&[s(1)], &s(2)).is_err());
    }
}
