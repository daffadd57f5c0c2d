//! Transcribed stratum diagrams and their verification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ring::{Element, Monomial, RingPresentation};
use crate::weyl::{RootDatum, WeylElement};
use crate::{Error, Result, ScalarP};

const C2_JSON: &str = include_str!("../../fixtures/c2.json");
const A2_UNITARY_JSON: &str = include_str!("../../fixtures/a2_unitary.json");
const A2_SPLIT_JSON: &str = include_str!("../../fixtures/a2_split.json");

/// Names accepted by [`DiagramFixture::builtin`].
pub const BUILTIN_FIXTURES: [&str; 3] = ["c2", "a2_unitary", "a2_split"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Misprint {
    pub printed: String,
    pub corrected: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub label: String,
    /// Reduced word of the stratum; `None` for nodes recording a vanishing product.
    pub weyl: Option<String>,
    pub class: String,
    #[serde(default)]
    pub forms: Vec<String>,
    #[serde(default)]
    pub relations: Vec<String>,
    #[serde(default)]
    pub misprints: Vec<Misprint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub label: String,
}

/// A diagram of stratum classes: nodes carry classes, an edge `u → v` labelled `χ`
/// asserts `χ · [u] = [v]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramFixture {
    pub name: String,
    pub ring: String,
    #[serde(rename = "type")]
    pub cartan: String,
    /// Monomial whose coefficient is the degree of a top-degree class.
    pub top: String,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl DiagramFixture {
    pub fn builtin(name: &str) -> Result<Self> {
        let src = match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "c2" => C2_JSON,
            "a2_unitary" | "a2u" => A2_UNITARY_JSON,
            "a2_split" | "a2s" => A2_SPLIT_JSON,
            _ => return Err(Error::Fixture(format!("no built-in fixture `{name}`"))),
        };
        Self::from_json(src)
    }

    pub fn c2() -> Self {
        Self::builtin("c2").expect("bundled fixture parses")
    }

    pub fn a2_unitary() -> Self {
        Self::builtin("a2_unitary").expect("bundled fixture parses")
    }

    pub fn a2_split() -> Self {
        Self::builtin("a2_split").expect("bundled fixture parses")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s)?;
        f.check_shape()?;
        Ok(f)
    }

    fn check_shape(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(Error::Fixture(format!("duplicate node `{}`", n.id)));
            }
        }
        for e in &self.edges {
            for end in [&e.from, &e.to] {
                if !ids.contains(end.as_str()) {
                    return Err(Error::Fixture(format!("edge endpoint `{end}` is not a node")));
                }
            }
        }
        if self.roots().is_empty() {
            return Err(Error::Fixture("diagram has no source node".into()));
        }
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Nodes without incoming edges.
    pub fn roots(&self) -> Vec<&str> {
        let targets: BTreeSet<&str> = self.edges.iter().map(|e| e.to.as_str()).collect();
        self.nodes.iter().map(|n| n.id.as_str()).filter(|id| !targets.contains(id)).collect()
    }

    pub fn children(&self, id: &str) -> Vec<&EdgeSpec> {
        self.edges.iter().filter(|e| e.from == id).collect()
    }

    /// Graphviz rendering with the transcribed labels.
    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", esc(&self.name));
        let _ = writeln!(out, "  rankdir=TB;");
        for n in &self.nodes {
            let head = match &n.weyl {
                Some(w) => format!("{} [{}]", n.label, w),
                None => n.label.clone(),
            };
            let _ = writeln!(out, "  \"{}\" [label=\"{}\\n{}\"];", esc(&n.id), esc(&head), esc(&n.class));
        }
        for e in &self.edges {
            let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", esc(&e.from), esc(&e.to), esc(&e.label));
        }
        out.push_str("}\n");
        out
    }
}

/// A fixture with every expression parsed in its ring.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub fixture: DiagramFixture,
    pub ring: Arc<RingPresentation>,
    pub datum: Arc<RootDatum>,
    pub top: Monomial,
    pub classes: BTreeMap<String, Element>,
    pub elements: BTreeMap<String, WeylElement>,
}

impl Diagram {
    pub fn new(fixture: &DiagramFixture) -> Result<Self> {
        let ring = RingPresentation::by_name(&fixture.ring)?;
        let datum = RootDatum::parse(&fixture.cartan)?;
        let top = ring.parse_monomial(&fixture.top)?;
        let mut classes = BTreeMap::new();
        let mut elements = BTreeMap::new();
        for n in &fixture.nodes {
            classes.insert(n.id.clone(), ring.parse(&n.class)?);
            if let Some(w) = &n.weyl {
                elements.insert(n.id.clone(), datum.parse_element(w)?);
            }
        }
        Ok(Diagram { fixture: fixture.clone(), ring, datum, top, classes, elements })
    }

    pub fn class(&self, id: &str) -> Result<&Element> {
        self.classes.get(id).ok_or_else(|| Error::MissingTableEntry(id.to_string()))
    }

    /// Node ids of strata of length `l`.
    pub fn of_length(&self, l: usize) -> Vec<&str> {
        self.fixture
            .nodes
            .iter()
            .filter(|n| self.elements.get(&n.id).is_some_and(|w| self.datum.length(w) == l))
            .map(|n| n.id.as_str())
            .collect()
    }

    pub fn max_length(&self) -> usize {
        self.elements.values().map(|w| self.datum.length(w)).max().unwrap_or(0)
    }

    /// Coefficient of the top monomial.
    pub fn degree(&self, x: &Element) -> ScalarP {
        x.coeff(&self.top)
    }

    /// Products of edge labels along every path from a source, keyed by end node.
    pub fn path_products(&self) -> Result<Vec<(Vec<String>, Element)>> {
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<String>, Element)> = Vec::new();
        for r in self.fixture.roots() {
            stack.push((vec![r.to_string()], self.class(r)?.clone()));
        }
        while let Some((path, value)) = stack.pop() {
            let last = path.last().expect("paths are nonempty").clone();
            for e in self.fixture.children(&last) {
                let next = self.ring.parse(&e.label)?.multiply(&value)?;
                let mut p = path.clone();
                p.push(e.to.clone());
                stack.push((p, next));
            }
            out.push((path, value));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramCheck {
    pub kind: String,
    pub subject: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub name: String,
    pub checks: Vec<DiagramCheck>,
}

impl DiagramReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> Vec<&DiagramCheck> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }

    fn push(&mut self, kind: &str, subject: String, result: Result<Option<String>>) {
        let (ok, detail) = match result {
            Ok(None) => (true, None),
            Ok(Some(d)) => (false, Some(d)),
            Err(e) => (false, Some(e.to_string())),
        };
        self.checks.push(DiagramCheck { kind: kind.into(), subject, ok, detail });
    }
}

fn mismatch(expected: &Element, got: &Element) -> Option<String> {
    (expected != got).then(|| format!("expected {expected}, got {got}"))
}

/// Check every relation, alternative form, edge and path of a fixture.
pub fn verify_diagram(fixture: &DiagramFixture) -> Result<DiagramReport> {
    let dg = Diagram::new(fixture)?;
    let ring = &dg.ring;
    let mut report = DiagramReport { name: fixture.name.clone(), checks: Vec::new() };
    for n in &fixture.nodes {
        let class = dg.class(&n.id)?;
        for r in &n.relations {
            let res = ring.parse(r).map(|x| (!x.is_zero()).then(|| format!("reduces to {x}")));
            report.push("relation", format!("{}: {r}", n.id), res);
        }
        for f in &n.forms {
            let res = ring.parse(f).map(|x| mismatch(class, &x));
            report.push("form", format!("{}: {f}", n.id), res);
        }
        for m in &n.misprints {
            let res = ring.parse(&m.corrected).map(|x| mismatch(class, &x));
            report.push("correction", format!("{}: {}", n.id, m.corrected), res);
        }
    }
    for e in &fixture.edges {
        let res = (|| {
            let product = ring.parse(&e.label)?.multiply(dg.class(&e.from)?)?;
            Ok(mismatch(dg.class(&e.to)?, &product))
        })();
        report.push("edge", format!("{} -> {}", e.from, e.to), res);
        if let (Some(u), Some(v)) = (dg.elements.get(&e.from), dg.elements.get(&e.to)) {
            let ok = dg.datum.lower_neighbours(u).iter().any(|(_, x)| x == v);
            let detail = (!ok).then(|| format!("{} is not a lower neighbour", e.to));
            report.push("bruhat", format!("{} -> {}", e.from, e.to), Ok(detail));
        }
    }
    for (path, value) in dg.path_products()? {
        if path.len() < 2 {
            continue;
        }
        let end = path.last().expect("nonempty");
        let res = dg.class(end).map(|c| mismatch(c, &value));
        report.push("path", path.join(" -> "), res);
    }
    Ok(report)
}

/// The printed expression of a misprint evaluates differently from the node class.
pub fn misprint_differs(fixture: &DiagramFixture, node: &str, printed: &str) -> Result<bool> {
    let dg = Diagram::new(fixture)?;
    Ok(dg.ring.parse(printed)? != *dg.class(node)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_verify() {
        for name in BUILTIN_FIXTURES {
            let f = DiagramFixture::builtin(name).unwrap();
            let r = verify_diagram(&f).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.failures());
            assert!(r.checks.iter().any(|c| c.kind == "path"));
        }
    }

    #[test]
    fn printed_misprints_fail() {
        for name in BUILTIN_FIXTURES {
            let f = DiagramFixture::builtin(name).unwrap();
            for n in &f.nodes {
                for m in &n.misprints {
                    assert!(misprint_differs(&f, &n.id, &m.printed).unwrap(), "{}", m.printed);
                }
            }
        }
    }

    #[test]
    fn corrupted_edge_is_reported() {
        let mut f = DiagramFixture::c2();
        f.edges[2].label = "1/2*((p-1)*l1+(p-1)*l2)".into();
        let r = verify_diagram(&f).unwrap();
        assert!(!r.passed());
        let kinds: BTreeSet<&str> = r.failures().iter().map(|c| c.kind.as_str()).collect();
        assert!(kinds.contains("edge") && kinds.contains("path"));
        assert!(r.failures().iter().any(|c| c.subject == "sgn1 -> sasb"));
    }

    #[test]
    fn bad_shape_is_rejected() {
        let mut f = DiagramFixture::a2_split();
        f.edges[0].to = "nowhere".into();
        let s = serde_json::to_string(&f).unwrap();
        assert!(matches!(DiagramFixture::from_json(&s), Err(Error::Fixture(_))));
        assert!(DiagramFixture::builtin("g2").is_err());
    }

    #[test]
    fn minimal_strata_have_positive_degree() {
        for name in BUILTIN_FIXTURES {
            let dg = Diagram::new(&DiagramFixture::builtin(name).unwrap()).unwrap();
            let point = dg.of_length(0);
            assert_eq!(point.len(), 1);
            assert!(dg.degree(dg.class(point[0]).unwrap()).is_positive(), "{name}");
        }
    }

    #[test]
    fn dot_lists_every_edge() {
        let f = DiagramFixture::a2_unitary();
        let dot = f.to_dot();
        assert!(dot.starts_with("digraph \"A2-unitary\""));
        assert_eq!(dot.matches("->").count(), f.edges.len());
    }
}
