//! Stratum diagrams, curve criteria, proportionality in type A and powers of
//! partial Hasse generators.

pub mod curves;
pub mod fixture;

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::azip::{self, CyclicSubset};
use crate::ring::{express_in_classes, Element, RingPresentation};
use crate::{Error, Result, ScalarP};

pub use curves::{
    a2u_matrix, curve_cone_a1d, curve_cone_a2u, curve_cone_c2, dual_cone_check, CurveCriteria, CurveVerdict,
    DualConeOutcome,
};
pub use fixture::{verify_diagram, Diagram, DiagramFixture, DiagramReport, BUILTIN_FIXTURES};

/// Degrees of `l2 · [Y_sgn2]` and `l2 · [Y_(12)]` on the C2 flag space, on `l1 l2³`.
pub fn hodge_nonnef_c2(p: &ScalarP) -> Result<(ScalarP, ScalarP)> {
    let dg = Diagram::new(&DiagramFixture::c2())?;
    let l2 = dg.ring.parse("l2")?;
    let deg = |id: &str| -> Result<ScalarP> {
        let c = dg.degree(&l2.multiply(dg.class(id)?)?);
        curves::substitute(&c, p)
    };
    Ok((deg("sb")?, deg("sa")?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proportionality {
    pub n: usize,
    pub r: usize,
    /// `e_r(−l2, …, −ln)`, the r-th Chern class of the tautological quotient.
    pub chern: Element,
    pub power: Element,
}

impl Proportionality {
    pub fn holds(&self) -> bool {
        self.chern == self.power
    }
}

/// Compare `c_r` of the rank `n−1` quotient with `c_1^r = l1^r` in the coinvariant ring.
pub fn proportionality_type_a(n: usize, r: usize) -> Result<Proportionality> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("n = {n}")));
    }
    if r > n {
        return Err(Error::OutOfRange(format!("r = {r} > n = {n}")));
    }
    let ring = RingPresentation::coinvariant(n);
    let mut e: Vec<Element> = vec![Element::one(&ring)];
    e.resize(r + 1, Element::zero(&ring));
    for i in 1..n {
        let x = Element::generator(&ring, i).neg();
        for k in (1..=r).rev() {
            e[k] = e[k].try_add(&x.multiply(&e[k - 1])?)?;
        }
    }
    let power = Element::generator(&ring, 0).pow(r as u32)?;
    Ok(Proportionality { n, r, chern: e[r].clone(), power })
}

/// Strata classes grouped by codimension.
#[derive(Clone, Debug)]
pub struct StrataTable {
    pub ring: Arc<RingPresentation>,
    pub levels: Vec<Vec<(String, Element)>>,
}

impl StrataTable {
    pub fn from_diagram(dg: &Diagram) -> Result<Self> {
        let top = dg.max_length();
        let levels = (0..=top)
            .map(|c| {
                dg.of_length(top - c)
                    .into_iter()
                    .map(|id| Ok((id.to_string(), dg.class(id)?.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StrataTable { ring: dg.ring.clone(), levels })
    }

    pub fn from_fixture(f: &DiagramFixture) -> Result<Self> {
        Self::from_diagram(&Diagram::new(f)?)
    }

    /// Level `c` holds `N_J` for every `|J| = c`.
    pub fn hilbert(d: usize) -> Result<Self> {
        if d == 0 || d > 16 {
            return Err(Error::OutOfRange(format!("d = {d}")));
        }
        let ring = RingPresentation::hilbert(d);
        let levels = (0..=d)
            .map(|c| {
                CyclicSubset::all_of_size(d, c)
                    .into_iter()
                    .map(|j| (j.to_string(), azip::strata_n(&j)))
                    .collect()
            })
            .collect();
        Ok(StrataTable { ring, levels })
    }

    pub fn position(&self, label: &str) -> Option<(usize, usize)> {
        self.levels
            .iter()
            .enumerate()
            .find_map(|(c, lv)| lv.iter().position(|(l, _)| l == label).map(|k| (c, k)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HassePower {
    pub m: usize,
    pub terms: Vec<(String, ScalarP)>,
    pub effective: bool,
    /// Every single multiplication step had nonnegative coefficients.
    pub stepwise_effective: bool,
}

/// Expand `λ^m · [fundamental class]` through the table, one codimension at a time.
pub fn hasse_generator_power(table: &StrataTable, lambda: &Element, m: usize) -> Result<HassePower> {
    if !lambda.is_zero() && lambda.homogeneous_degree() != Some(1) {
        return Err(Error::OutOfRange("the weight must have degree one".into()));
    }
    let base = table.levels.first().filter(|l| l.len() == 1).ok_or_else(|| Error::MissingTableEntry("codimension 0".into()))?;
    let mut current: Vec<ScalarP> = vec![ScalarP::one()];
    let mut stepwise = true;
    for step in 0..m {
        let next_level = match table.levels.get(step + 1) {
            Some(l) if !l.is_empty() => l,
            _ => {
                let lv = &table.levels[step];
                let zero = lv.iter().try_fold(true, |acc, (_, c)| Ok::<_, Error>(acc && lambda.multiply(c)?.is_zero()))?;
                if zero || current.iter().all(|c| c.is_zero()) {
                    return Ok(HassePower { m, terms: Vec::new(), effective: true, stepwise_effective: stepwise });
                }
                return Err(Error::MissingTableEntry(format!("codimension {}", step + 1)));
            }
        };
        let classes: Vec<Element> = next_level.iter().map(|(_, c)| c.clone()).collect();
        let mut acc = vec![ScalarP::zero(); classes.len()];
        for ((label, class), c) in table.levels[step].iter().zip(&current) {
            if c.is_zero() {
                continue;
            }
            let product = lambda.multiply(class)?;
            let coeffs = express_in_classes(&classes, &product).map_err(|_| Error::MissingTableEntry(label.clone()))?;
            stepwise &= coeffs.iter().all(|x| x.is_nonnegative());
            for (a, x) in acc.iter_mut().zip(coeffs) {
                *a = a.clone() + c.clone() * x;
            }
        }
        current = acc;
    }
    let level = if m == 0 { base } else { &table.levels[m] };
    let terms: Vec<(String, ScalarP)> = level
        .iter()
        .zip(current)
        .filter(|(_, c)| !c.is_zero())
        .map(|((l, _), c)| (l.clone(), c))
        .collect();
    let effective = terms.iter().all(|(_, c)| c.is_nonnegative());
    Ok(HassePower { m, terms, effective, stepwise_effective: stepwise })
}
