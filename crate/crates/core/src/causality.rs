//! Sequential causality assignment.
//!
//! Sources are fixed first, then every storage element is given integral
//! causality in insertion order, then any bond still free (resistive loops,
//! junction-to-junction chains) is oriented from its tail. Each decision is
//! propagated through junction, transformer and gyrator constraints before
//! the next one is taken, so identical graphs always receive identical
//! strokes.

use std::collections::VecDeque;

use crate::error::CausalityError;
use crate::graph::{Bond, BondGraph, BondId, ElementId, ElementKind};

/// A bond graph with one causal stroke per bond.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    graph: BondGraph,
    effort_setter: Vec<ElementId>,
}

impl CausalGraph {
    pub fn graph(&self) -> &BondGraph {
        &self.graph
    }

    /// The element that imposes the effort of `bond`; the other end imposes its flow.
    pub fn effort_setter(&self, bond: BondId) -> ElementId {
        self.effort_setter[bond.index()]
    }

    pub fn sets_effort(&self, element: ElementId, bond: BondId) -> bool {
        self.effort_setter(bond) == element
    }

    /// True when the C or I element `element` holds integral causality.
    pub fn is_integral(&self, element: ElementId) -> bool {
        let Some(el) = self.graph.element(element) else {
            return false;
        };
        let Some(bond) = self.graph.bonds_of(element).first().map(|b| b.id) else {
            return false;
        };
        match el.kind {
            ElementKind::C(_) | ElementKind::Mc(_) => self.sets_effort(element, bond),
            ElementKind::I(_) => !self.sets_effort(element, bond),
            _ => false,
        }
    }
}

pub fn assign_causality(graph: &BondGraph) -> Result<CausalGraph, CausalityError> {
    graph.validate()?;

    let mut assigner = Assigner {
        graph,
        setter: vec![None; graph.bonds().len()],
        queue: VecDeque::new(),
    };

    for element in graph.elements() {
        if matches!(
            element.kind,
            ElementKind::Se(_) | ElementKind::Mse(_) | ElementKind::Sf(_)
        ) {
            assigner.propagate(element.id)?;
            assigner.drain()?;
        }
    }

    for element in graph.elements() {
        if !element.kind.is_storage() {
            continue;
        }
        let bond = *graph.bonds_of(element.id)[0];
        if assigner.setter[bond.id.index()].is_some() {
            continue;
        }
        let setter = match element.kind {
            ElementKind::I(_) => bond.other(element.id),
            _ => element.id,
        };
        assigner.assign(&bond, setter, element.id)?;
        assigner.drain()?;
    }

    while let Some(bond) = graph
        .bonds()
        .iter()
        .find(|b| assigner.setter[b.id.index()].is_none())
    {
        assigner.assign(bond, bond.tail.element, bond.tail.element)?;
        assigner.drain()?;
    }

    let effort_setter: Vec<ElementId> = assigner.setter.into_iter().flatten().collect();
    debug_assert_eq!(effort_setter.len(), graph.bonds().len());

    let causal = CausalGraph {
        graph: graph.clone(),
        effort_setter,
    };
    for element in graph.elements() {
        if element.kind.is_storage() && !causal.is_integral(element.id) {
            return Err(CausalityError::DerivativeCausality(element.id));
        }
    }
    Ok(causal)
}

struct Assigner<'a> {
    graph: &'a BondGraph,
    setter: Vec<Option<ElementId>>,
    queue: VecDeque<ElementId>,
}

impl Assigner<'_> {
    fn assign(
        &mut self,
        bond: &Bond,
        setter: ElementId,
        by: ElementId,
    ) -> Result<(), CausalityError> {
        match self.setter[bond.id.index()] {
            Some(existing) if existing == setter => Ok(()),
            Some(_) => Err(CausalityError::CausalConflict(by)),
            None => {
                self.setter[bond.id.index()] = Some(setter);
                self.queue.push_back(bond.tail.element);
                self.queue.push_back(bond.head.element);
                Ok(())
            }
        }
    }

    fn drain(&mut self) -> Result<(), CausalityError> {
        while let Some(element) = self.queue.pop_front() {
            self.propagate(element)?;
        }
        Ok(())
    }

    /// Applies the local constraints of `id` to its bonds.
    fn propagate(&mut self, id: ElementId) -> Result<(), CausalityError> {
        let graph = self.graph;
        let kind = &graph
            .element(id)
            .expect("element of a validated graph")
            .kind;
        let bonds: Vec<Bond> = graph.bonds_of(id).into_iter().copied().collect();
        // Some(true) when `id` sets the effort on the bond
        let state: Vec<Option<bool>> = bonds
            .iter()
            .map(|b| self.setter[b.id.index()].map(|s| s == id))
            .collect();

        match kind {
            ElementKind::Se(_) | ElementKind::Mse(_) => self.assign(&bonds[0], id, id),
            ElementKind::Sf(_) => self.assign(&bonds[0], bonds[0].other(id), id),
            ElementKind::J0 => self.junction(id, &bonds, &state, false),
            ElementKind::J1 => self.junction(id, &bonds, &state, true),
            ElementKind::Tf(_) | ElementKind::Gy(_) => {
                let same = matches!(kind, ElementKind::Gy(_));
                match (state[0], state[1]) {
                    (Some(a), Some(b)) if (a == b) != same => {
                        Err(CausalityError::CausalConflict(id))
                    }
                    (Some(a), None) => {
                        let sets = if same { a } else { !a };
                        let setter = if sets { id } else { bonds[1].other(id) };
                        self.assign(&bonds[1], setter, id)
                    }
                    (None, Some(b)) => {
                        let sets = if same { b } else { !b };
                        let setter = if sets { id } else { bonds[0].other(id) };
                        self.assign(&bonds[0], setter, id)
                    }
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// A 0-junction receives its effort through exactly one bond; a 1-junction
    /// receives its flow through exactly one bond, i.e. sets effort on exactly one.
    fn junction(
        &mut self,
        id: ElementId,
        bonds: &[Bond],
        state: &[Option<bool>],
        one_junction: bool,
    ) -> Result<(), CausalityError> {
        // the "strong" bond: the single bond whose effort the junction receives (0)
        // or imposes (1)
        let is_strong = |sets: bool| sets == one_junction;
        let strong = state
            .iter()
            .filter(|s| matches!(s, Some(v) if is_strong(*v)))
            .count();
        let free: Vec<&Bond> = bonds
            .iter()
            .zip(state)
            .filter(|(_, s)| s.is_none())
            .map(|(b, _)| b)
            .collect();

        let setter_for = |bond: &Bond, strong: bool| {
            let junction_sets = strong == one_junction;
            if junction_sets {
                id
            } else {
                bond.other(id)
            }
        };

        match (strong, free.len()) {
            (n, _) if n > 1 => Err(CausalityError::CausalConflict(id)),
            (1, _) => {
                for bond in free {
                    self.assign(bond, setter_for(bond, false), id)?;
                }
                Ok(())
            }
            (0, 0) => Err(CausalityError::CausalConflict(id)),
            (0, 1) => self.assign(free[0], setter_for(free[0], true), id),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ElementKind::*;

    fn series_loop() -> (BondGraph, [ElementId; 4], [BondId; 3]) {
        let mut g = BondGraph::new();
        let se = g.add_element(Se(10.0)).unwrap();
        let j = g.add_element(J1).unwrap();
        let r = g.add_element(R(2.0)).unwrap();
        let c = g.add_element(C(0.5)).unwrap();
        let b1 = g.bond(se, j).unwrap();
        let b2 = g.bond(j, r).unwrap();
        let b3 = g.bond(j, c).unwrap();
        (g, [se, j, r, c], [b1, b2, b3])
    }

    #[test]
    fn series_loop_gives_integral_capacitor() {
        let (g, [se, j, _r, c], [b1, b2, b3]) = series_loop();
        let causal = assign_causality(&g).unwrap();
        assert!(causal.is_integral(c));
        assert_eq!(causal.effort_setter(b1), se);
        assert_eq!(causal.effort_setter(b3), c);
        // the resistor receives effort from the junction and returns flow
        assert_eq!(causal.effort_setter(b2), j);
    }

    #[test]
    fn two_capacitors_on_zero_junction() {
        let mut g = BondGraph::new();
        let c1 = g.add_element(C(1.0)).unwrap();
        let j = g.add_element(J0).unwrap();
        let c2 = g.add_element(C(2.0)).unwrap();
        g.bond(c1, j).unwrap();
        g.bond(j, c2).unwrap();
        assert_eq!(
            assign_causality(&g).unwrap_err(),
            CausalityError::DerivativeCausality(c2)
        );
    }

    #[test]
    fn two_effort_sources_on_zero_junction() {
        let mut g = BondGraph::new();
        let s1 = g.add_element(Se(1.0)).unwrap();
        let j = g.add_element(J0).unwrap();
        let s2 = g.add_element(Se(2.0)).unwrap();
        g.bond(s1, j).unwrap();
        g.bond(s2, j).unwrap();
        assert!(matches!(
            assign_causality(&g),
            Err(CausalityError::CausalConflict(_))
        ));
    }

    #[test]
    fn two_flow_sources_on_one_junction_conflict() {
        let mut g = BondGraph::new();
        let s1 = g.add_element(Sf(1.0)).unwrap();
        let j = g.add_element(J1).unwrap();
        let s2 = g.add_element(Sf(2.0)).unwrap();
        g.bond(s1, j).unwrap();
        g.bond(j, s2).unwrap();
        assert!(matches!(
            assign_causality(&g),
            Err(CausalityError::CausalConflict(_))
        ));
    }

    #[test]
    fn inertia_on_flow_source_is_derivative() {
        let mut g = BondGraph::new();
        let sf = g.add_element(Sf(1.0)).unwrap();
        let j = g.add_element(J1).unwrap();
        let i = g.add_element(I(1.0)).unwrap();
        g.bond(sf, j).unwrap();
        g.bond(j, i).unwrap();
        assert_eq!(
            assign_causality(&g).unwrap_err(),
            CausalityError::DerivativeCausality(i)
        );
    }

    #[test]
    fn transformer_passes_effort_through() {
        let mut g = BondGraph::new();
        let se = g.add_element(Se(1.0)).unwrap();
        let tf = g.add_element(Tf(2.0)).unwrap();
        let j = g.add_element(J1).unwrap();
        let i = g.add_element(I(1.0)).unwrap();
        let r = g.add_element(R(1.0)).unwrap();
        let b1 = g.bond(se, tf).unwrap();
        let b2 = g.bond(tf, j).unwrap();
        g.bond(j, i).unwrap();
        g.bond(j, r).unwrap();
        let causal = assign_causality(&g).unwrap();
        assert_eq!(causal.effort_setter(b1), se);
        assert_eq!(causal.effort_setter(b2), tf);
        assert!(causal.is_integral(i));
    }

    #[test]
    fn gyrator_swaps_causality() {
        // SE -> GY -> C: the gyrator turns the imposed effort into a flow, so C
        // keeps integral causality.
        let mut g = BondGraph::new();
        let se = g.add_element(Se(1.0)).unwrap();
        let gy = g.add_element(Gy(3.0)).unwrap();
        let c = g.add_element(C(1.0)).unwrap();
        g.bond(se, gy).unwrap();
        let b2 = g.bond(gy, c).unwrap();
        let causal = assign_causality(&g).unwrap();
        assert_eq!(causal.effort_setter(b2), c);
    }

    #[test]
    fn resistive_loop_is_still_assigned() {
        let mut g = BondGraph::new();
        let se = g.add_element(Se(1.0)).unwrap();
        let j0 = g.add_element(J0).unwrap();
        let r1 = g.add_element(R(1.0)).unwrap();
        let r2 = g.add_element(R(2.0)).unwrap();
        g.bond(se, j0).unwrap();
        g.bond(j0, r1).unwrap();
        g.bond(j0, r2).unwrap();
        let causal = assign_causality(&g).unwrap();
        for bond in causal.graph().bonds() {
            assert_eq!(
                causal.effort_setter(bond.id),
                if bond.tail.element == se { se } else { j0 }
            );
        }
    }

    #[test]
    fn assignment_is_deterministic() {
        let (g, _, bonds) = series_loop();
        let a = assign_causality(&g).unwrap();
        let b = assign_causality(&g).unwrap();
        for bond in bonds {
            assert_eq!(a.effort_setter(bond), b.effort_setter(bond));
        }
    }

    #[test]
    fn malformed_graph_is_rejected() {
        let mut g = BondGraph::new();
        g.add_element(Se(1.0)).unwrap();
        assert!(matches!(
            assign_causality(&g),
            Err(CausalityError::Malformed(_))
        ));
    }
}
