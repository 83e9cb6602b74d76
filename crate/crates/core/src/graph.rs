//! Acausal bond graphs: elements, power bonds and signal links.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::error::GraphError;

/// Identifier of an element, 1-based in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub(crate) usize);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn port(self, index: usize) -> Port {
        Port {
            element: self,
            index,
        }
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "element {}", self.0)
    }
}

/// Identifier of a bond, 1-based in insertion order ("bond 3" is `BondId(3)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BondId(pub(crate) usize);

impl BondId {
    pub fn new(number: usize) -> Self {
        assert!(number >= 1, "bond numbers start at 1");
        BondId(number)
    }

    pub fn number(self) -> usize {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for BondId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bond {}", self.0)
    }
}

/// A power port of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Port {
    pub element: ElementId,
    pub index: usize,
}

/// Source of a modulating signal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Signal {
    /// Effort carried by a bond.
    Effort(BondId),
    /// Flow carried by a bond.
    Flow(BondId),
    /// A named signal supplied from outside the graph; becomes a model input.
    External(String),
}

/// Law mapping the values of an element's signal links to a scalar
/// (effort of an MSE, capacitance of an MC).
pub type SignalLaw = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Constitutive law of a (possibly nonlinear) resistor.
///
/// `effort` is the effort across the element and `flow` the flow into it,
/// both taken positive for power entering the element.
pub trait ResistiveLaw: Send + Sync {
    fn flow(&self, effort: f64, signals: &[f64]) -> f64;
    fn effort(&self, flow: f64, signals: &[f64]) -> f64;
}

/// Linear resistor whose coefficient is computed from its signal links.
pub struct SignalResistance<F>(pub F);

impl<F> ResistiveLaw for SignalResistance<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn flow(&self, effort: f64, signals: &[f64]) -> f64 {
        effort / (self.0)(signals)
    }

    fn effort(&self, flow: f64, signals: &[f64]) -> f64 {
        (self.0)(signals) * flow
    }
}

#[derive(Clone)]
pub enum ElementKind {
    /// Effort source with a nominal effort (overridable through the model input).
    Se(f64),
    /// Flow source with a nominal flow, positive out of the source.
    Sf(f64),
    /// Effort source whose effort is a function of its signal links.
    Mse(SignalLaw),
    R(f64),
    Mr(Arc<dyn ResistiveLaw>),
    C(f64),
    /// Capacitor whose capacitance is a function of its signal links.
    Mc(SignalLaw),
    I(f64),
    Tf(f64),
    Gy(f64),
    J0,
    J1,
}

impl ElementKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ElementKind::Se(_) => "SE",
            ElementKind::Sf(_) => "SF",
            ElementKind::Mse(_) => "MSE",
            ElementKind::R(_) => "R",
            ElementKind::Mr(_) => "MR",
            ElementKind::C(_) => "C",
            ElementKind::Mc(_) => "MC",
            ElementKind::I(_) => "I",
            ElementKind::Tf(_) => "TF",
            ElementKind::Gy(_) => "GY",
            ElementKind::J0 => "0",
            ElementKind::J1 => "1",
        }
    }

    /// Number of power ports, `None` for junctions (any number ≥ 2).
    pub fn port_count(&self) -> Option<usize> {
        match self {
            ElementKind::Tf(_) | ElementKind::Gy(_) => Some(2),
            ElementKind::J0 | ElementKind::J1 => None,
            _ => Some(1),
        }
    }

    pub fn is_junction(&self) -> bool {
        matches!(self, ElementKind::J0 | ElementKind::J1)
    }

    pub fn is_storage(&self) -> bool {
        matches!(
            self,
            ElementKind::C(_) | ElementKind::Mc(_) | ElementKind::I(_)
        )
    }

    pub fn is_modulated(&self) -> bool {
        matches!(
            self,
            ElementKind::Mse(_) | ElementKind::Mr(_) | ElementKind::Mc(_)
        )
    }

    fn validate(&self) -> Result<(), GraphError> {
        let (name, value, positive) = match *self {
            ElementKind::Se(e) => ("effort", e, false),
            ElementKind::Sf(f) => ("flow", f, false),
            ElementKind::R(r) => ("resistance", r, true),
            ElementKind::C(c) => ("capacitance", c, true),
            ElementKind::I(i) => ("inertance", i, true),
            ElementKind::Tf(m) => ("modulus", m, true),
            ElementKind::Gy(r) => ("modulus", r, true),
            _ => return Ok(()),
        };
        if !value.is_finite() {
            return Err(GraphError::NonFiniteParameter {
                kind: self.tag(),
                name,
            });
        }
        if positive && value <= 0.0 {
            return Err(GraphError::NonPositiveParameter {
                kind: self.tag(),
                name,
                value,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKind::Se(v)
            | ElementKind::Sf(v)
            | ElementKind::R(v)
            | ElementKind::C(v)
            | ElementKind::I(v)
            | ElementKind::Tf(v)
            | ElementKind::Gy(v) => write!(f, "{}({})", self.tag(), v),
            _ => f.write_str(self.tag()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Element {
    pub id: ElementId,
    pub label: String,
    pub kind: ElementKind,
}

/// A power bond; positive power flows from `tail` to `head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub id: BondId,
    pub tail: Port,
    pub head: Port,
}

impl Bond {
    /// The element at the other end of the bond.
    pub fn other(&self, element: ElementId) -> ElementId {
        if self.tail.element == element {
            self.head.element
        } else {
            self.tail.element
        }
    }

    /// +1 when power enters `element` through this bond, -1 when it leaves.
    pub fn sign_into(&self, element: ElementId) -> f64 {
        if self.head.element == element {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalLink {
    pub source: Signal,
    pub target: ElementId,
}

#[derive(Debug, Clone, Default)]
pub struct BondGraph {
    elements: Vec<Element>,
    bonds: Vec<Bond>,
    links: Vec<SignalLink>,
}

impl BondGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an element labelled after its kind and id (e.g. `C3`).
    pub fn add_element(&mut self, kind: ElementKind) -> Result<ElementId, GraphError> {
        let label = format!("{}{}", kind.tag(), self.elements.len() + 1);
        self.add_labeled(kind, label)
    }

    pub fn add_labeled(
        &mut self,
        kind: ElementKind,
        label: impl Into<String>,
    ) -> Result<ElementId, GraphError> {
        kind.validate()?;
        let id = ElementId(self.elements.len() + 1);
        self.elements.push(Element {
            id,
            label: label.into(),
            kind,
        });
        Ok(id)
    }

    /// Bonds two ports; power direction is `from` → `to`.
    pub fn connect(&mut self, from: Port, to: Port) -> Result<BondId, GraphError> {
        self.check_port(from)?;
        self.check_port(to)?;
        if from == to {
            return Err(GraphError::PortAlreadyBound {
                element: from.element,
                port: from.index,
            });
        }
        for port in [from, to] {
            if self.bond_at(port).is_some() {
                return Err(GraphError::PortAlreadyBound {
                    element: port.element,
                    port: port.index,
                });
            }
        }
        let id = BondId(self.bonds.len() + 1);
        self.bonds.push(Bond {
            id,
            tail: from,
            head: to,
        });
        Ok(id)
    }

    /// Bonds the first free port of `from` to the first free port of `to`.
    pub fn bond(&mut self, from: ElementId, to: ElementId) -> Result<BondId, GraphError> {
        let a = self.free_port(from)?;
        let b = self.free_port(to)?;
        self.connect(a, b)
    }

    /// Feeds `source` into the modulated element `target`. Links are read by
    /// the element's law in the order they were added.
    pub fn link(&mut self, source: Signal, target: ElementId) -> Result<(), GraphError> {
        let element = self
            .element(target)
            .ok_or(GraphError::UnknownElement(target))?;
        if !element.kind.is_modulated() {
            return Err(GraphError::NotModulated(target));
        }
        match &source {
            Signal::Effort(b) | Signal::Flow(b) => {
                if b.0 == 0 || b.0 > self.bonds.len() {
                    return Err(GraphError::UnknownBond(*b));
                }
            }
            Signal::External(_) => {}
        }
        self.links.push(SignalLink { source, target });
        Ok(())
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn links(&self) -> &[SignalLink] {
        &self.links
    }

    pub fn element(&self, id: ElementId) -> Option<&Element> {
        id.0.checked_sub(1).and_then(|i| self.elements.get(i))
    }

    pub fn bond_by_id(&self, id: BondId) -> Option<&Bond> {
        id.0.checked_sub(1).and_then(|i| self.bonds.get(i))
    }

    /// Signal sources feeding `target`, in link order.
    pub fn signals_of(&self, target: ElementId) -> impl Iterator<Item = &Signal> {
        self.links
            .iter()
            .filter(move |l| l.target == target)
            .map(|l| &l.source)
    }

    /// Bonds attached to `element`, ordered by port index.
    pub fn bonds_of(&self, element: ElementId) -> Vec<&Bond> {
        let mut attached: Vec<(usize, &Bond)> = self
            .bonds
            .iter()
            .filter_map(|b| {
                if b.tail.element == element {
                    Some((b.tail.index, b))
                } else if b.head.element == element {
                    Some((b.head.index, b))
                } else {
                    None
                }
            })
            .collect();
        attached.sort_by_key(|(port, _)| *port);
        attached.into_iter().map(|(_, b)| b).collect()
    }

    fn bond_at(&self, port: Port) -> Option<&Bond> {
        self.bonds.iter().find(|b| b.tail == port || b.head == port)
    }

    fn check_port(&self, port: Port) -> Result<(), GraphError> {
        let element = self.element(port.element).ok_or(GraphError::UnknownPort {
            element: port.element,
            port: port.index,
        })?;
        match element.kind.port_count() {
            Some(n) if port.index >= n => Err(GraphError::UnknownPort {
                element: port.element,
                port: port.index,
            }),
            _ => Ok(()),
        }
    }

    fn free_port(&self, element: ElementId) -> Result<Port, GraphError> {
        let kind = &self
            .element(element)
            .ok_or(GraphError::UnknownElement(element))?
            .kind;
        let bound: HashSet<usize> = self
            .bonds
            .iter()
            .flat_map(|b| [b.tail, b.head])
            .filter(|p| p.element == element)
            .map(|p| p.index)
            .collect();
        let limit = kind.port_count().unwrap_or(usize::MAX);
        (0..limit)
            .find(|i| !bound.contains(i))
            .map(|i| element.port(i))
            .ok_or(GraphError::PortAlreadyBound {
                element,
                port: limit.saturating_sub(1),
            })
    }

    /// Checks the structural invariants: every fixed port bound, junctions
    /// with at least two bonds, and a single connected component (bonds and
    /// bond-sourced signal links both count as connections).
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.elements.is_empty() {
            return Err(GraphError::Empty);
        }
        for element in &self.elements {
            let attached = self.bonds_of(element.id).len();
            match element.kind.port_count() {
                Some(n) if attached < n => {
                    return Err(GraphError::DanglingPort(element.id));
                }
                None if attached < 2 => {
                    return Err(GraphError::DanglingPort(element.id));
                }
                _ => {}
            }
        }

        let mut seen = vec![false; self.elements.len()];
        let mut stack = vec![self.elements[0].id];
        seen[0] = true;
        // signal links join the elements of their source bond to the target
        let mut neighbours: Vec<Vec<ElementId>> = vec![Vec::new(); self.elements.len()];
        for bond in &self.bonds {
            neighbours[bond.tail.element.index()].push(bond.head.element);
            neighbours[bond.head.element.index()].push(bond.tail.element);
        }
        for link in &self.links {
            if let Signal::Effort(b) | Signal::Flow(b) = &link.source {
                let bond = self.bonds[b.index()];
                for end in [bond.tail.element, bond.head.element] {
                    neighbours[end.index()].push(link.target);
                    neighbours[link.target.index()].push(end);
                }
            }
        }
        while let Some(current) = stack.pop() {
            for &next in &neighbours[current.index()] {
                if !seen[next.index()] {
                    seen[next.index()] = true;
                    stack.push(next);
                }
            }
        }
        if let Some(pos) = seen.iter().position(|s| !s) {
            return Err(GraphError::Disconnected(self.elements[pos].id));
        }
        Ok(())
    }
}
