//! Compilation of a causal bond graph into an executable state-space model.
//!
//! Every bond carries two variables, its effort and its flow. The causal
//! strokes decide which end computes which variable; each element contributes
//! one rule per variable it imposes. Rules are ordered by their data
//! dependencies once at compile time, so an evaluation is a single pass over
//! the rule list followed by reading the storage rates off their bonds.
//!
//! Sign conventions: efforts and flows are bond quantities, positive power
//! runs from tail to head. One-port laws are written for the flow *into* the
//! element (`s·f` with `s = ±1`), junctions use the usual signed sums.

use std::sync::Arc;

use crate::causality::CausalGraph;
use crate::error::DeriveError;
use crate::graph::{Bond, BondId, ElementKind, ResistiveLaw, Signal, SignalLaw};
use crate::model::{Dynamics, StateSpaceModel};

#[derive(Clone, Copy)]
enum Source {
    Var(usize),
    Input(usize),
}

#[derive(Clone)]
enum Capacitance {
    Constant(f64),
    Modulated(SignalLaw, Vec<Source>),
}

#[derive(Clone)]
enum Resistance {
    Linear(f64),
    Law(Arc<dyn ResistiveLaw>, Vec<Source>),
}

#[derive(Clone)]
enum Rule {
    /// `gain · u[slot]`
    Input {
        slot: usize,
        gain: f64,
    },
    Modulated {
        law: SignalLaw,
        signals: Vec<Source>,
    },
    /// `q / C`
    StoredEffort {
        state: usize,
        capacitance: Capacitance,
    },
    /// `s · p / I`
    StoredFlow {
        state: usize,
        inertance: f64,
        sign: f64,
    },
    /// `e = R(s·f)`
    ResistorEffort {
        resistance: Resistance,
        flow: usize,
        sign: f64,
    },
    /// `f = s · R⁻¹(e)`
    ResistorFlow {
        resistance: Resistance,
        effort: usize,
        sign: f64,
    },
    Scaled {
        from: usize,
        gain: f64,
    },
    Sum {
        terms: Vec<(usize, f64)>,
    },
}

impl Rule {
    fn dependencies(&self) -> Vec<usize> {
        let vars = |signals: &[Source]| -> Vec<usize> {
            signals
                .iter()
                .filter_map(|s| match s {
                    Source::Var(v) => Some(*v),
                    Source::Input(_) => None,
                })
                .collect()
        };
        let resistance_vars = |r: &Resistance| match r {
            Resistance::Linear(_) => Vec::new(),
            Resistance::Law(_, signals) => vars(signals),
        };
        match self {
            Rule::Input { .. } | Rule::StoredFlow { .. } => Vec::new(),
            Rule::Modulated { signals, .. } => vars(signals),
            Rule::StoredEffort { capacitance, .. } => match capacitance {
                Capacitance::Constant(_) => Vec::new(),
                Capacitance::Modulated(_, signals) => vars(signals),
            },
            Rule::ResistorEffort {
                resistance, flow, ..
            } => {
                let mut deps = resistance_vars(resistance);
                deps.push(*flow);
                deps
            }
            Rule::ResistorFlow {
                resistance, effort, ..
            } => {
                let mut deps = resistance_vars(resistance);
                deps.push(*effort);
                deps
            }
            Rule::Scaled { from, .. } => vec![*from],
            Rule::Sum { terms } => terms.iter().map(|(v, _)| *v).collect(),
        }
    }
}

type VarIndex = fn(BondId) -> usize;

fn effort_var(bond: BondId) -> usize {
    2 * bond.index()
}

fn flow_var(bond: BondId) -> usize {
    2 * bond.index() + 1
}

/// How a state's rate is read from the bond variables.
#[derive(Clone, Copy)]
struct StateRate {
    var: usize,
    sign: f64,
}

struct GraphDynamics {
    /// (target variable, rule) in evaluation order
    rules: Vec<(usize, Rule)>,
    var_count: usize,
    rates: Vec<StateRate>,
}

impl GraphDynamics {
    fn evaluate(&self, state: &[f64], inputs: &[f64], vars: &mut [f64]) {
        let mut scratch = Vec::new();
        let gather = |signals: &[Source], vars: &[f64], scratch: &mut Vec<f64>| {
            scratch.clear();
            scratch.extend(signals.iter().map(|s| match *s {
                Source::Var(v) => vars[v],
                Source::Input(i) => inputs[i],
            }));
        };
        for (target, rule) in &self.rules {
            let value = match rule {
                Rule::Input { slot, gain } => gain * inputs[*slot],
                Rule::Modulated { law, signals } => {
                    gather(signals, vars, &mut scratch);
                    law(&scratch)
                }
                Rule::StoredEffort {
                    state: k,
                    capacitance,
                } => match capacitance {
                    Capacitance::Constant(c) => state[*k] / c,
                    Capacitance::Modulated(law, signals) => {
                        gather(signals, vars, &mut scratch);
                        state[*k] / law(&scratch)
                    }
                },
                Rule::StoredFlow {
                    state: k,
                    inertance,
                    sign,
                } => sign * state[*k] / inertance,
                Rule::ResistorEffort {
                    resistance,
                    flow,
                    sign,
                } => {
                    let f_in = sign * vars[*flow];
                    match resistance {
                        Resistance::Linear(r) => r * f_in,
                        Resistance::Law(law, signals) => {
                            gather(signals, vars, &mut scratch);
                            law.effort(f_in, &scratch)
                        }
                    }
                }
                Rule::ResistorFlow {
                    resistance,
                    effort,
                    sign,
                } => {
                    let e = vars[*effort];
                    let f_in = match resistance {
                        Resistance::Linear(r) => e / r,
                        Resistance::Law(law, signals) => {
                            gather(signals, vars, &mut scratch);
                            law.flow(e, &scratch)
                        }
                    };
                    sign * f_in
                }
                Rule::Scaled { from, gain } => gain * vars[*from],
                Rule::Sum { terms } => terms.iter().map(|(v, g)| g * vars[*v]).sum(),
            };
            vars[*target] = value;
        }
    }
}

impl Dynamics for GraphDynamics {
    fn derivatives(&self, _t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        let mut vars = vec![0.0; self.var_count];
        self.evaluate(state, inputs, &mut vars);
        for (rate, slot) in self.rates.iter().zip(out.iter_mut()) {
            *slot = rate.sign * vars[rate.var];
        }
    }

    fn observables(&self, _t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        self.evaluate(state, inputs, out);
    }
}

/// Compiles a causal graph into a model.
///
/// States are one displacement `q_<label>` per C/MC and one momentum
/// `p_<label>` per I, in element order. Inputs are one slot per SE/SF
/// (labelled by the element) and one per distinct external signal.
/// Observables are `e<n>` and `f<n>` for every bond `n`, interleaved.
pub fn derive_state_equations(causal: &CausalGraph) -> Result<StateSpaceModel, DeriveError> {
    let graph = causal.graph();
    let bonds = graph.bonds();
    let var_count = 2 * bonds.len();

    let mut input_labels: Vec<String> = Vec::new();
    let mut nominal_inputs: Vec<f64> = Vec::new();
    let mut state_labels: Vec<String> = Vec::new();
    let mut rates: Vec<StateRate> = Vec::new();
    let mut rules: Vec<Option<Rule>> = vec![None; var_count];

    let mut input_slot = |label: &str, nominal: f64, labels: &mut Vec<String>| -> usize {
        if let Some(i) = labels.iter().position(|l| l == label) {
            return i;
        }
        labels.push(label.to_string());
        nominal_inputs.push(nominal);
        labels.len() - 1
    };

    for element in graph.elements() {
        let id = element.id;
        let attached: Vec<Bond> = graph.bonds_of(id).into_iter().copied().collect();
        let signals: Vec<Source> = graph
            .signals_of(id)
            .map(|s| match s {
                Signal::Effort(b) => Source::Var(effort_var(*b)),
                Signal::Flow(b) => Source::Var(flow_var(*b)),
                Signal::External(name) => Source::Input(input_slot(name, 0.0, &mut input_labels)),
            })
            .collect();

        match &element.kind {
            ElementKind::Se(e) => {
                let slot = input_slot(&element.label, *e, &mut input_labels);
                rules[effort_var(attached[0].id)] = Some(Rule::Input { slot, gain: 1.0 });
            }
            ElementKind::Sf(f) => {
                let slot = input_slot(&element.label, *f, &mut input_labels);
                let s = attached[0].sign_into(id);
                rules[flow_var(attached[0].id)] = Some(Rule::Input { slot, gain: -s });
            }
            ElementKind::Mse(law) => {
                rules[effort_var(attached[0].id)] = Some(Rule::Modulated {
                    law: law.clone(),
                    signals,
                });
            }
            ElementKind::C(_) | ElementKind::Mc(_) => {
                let bond = attached[0];
                let capacitance = match &element.kind {
                    ElementKind::C(c) => Capacitance::Constant(*c),
                    ElementKind::Mc(law) => Capacitance::Modulated(law.clone(), signals),
                    _ => unreachable!(),
                };
                let state = state_labels.len();
                state_labels.push(format!("q_{}", element.label));
                rates.push(StateRate {
                    var: flow_var(bond.id),
                    sign: bond.sign_into(id),
                });
                rules[effort_var(bond.id)] = Some(Rule::StoredEffort { state, capacitance });
            }
            ElementKind::I(inertance) => {
                let bond = attached[0];
                let state = state_labels.len();
                state_labels.push(format!("p_{}", element.label));
                rates.push(StateRate {
                    var: effort_var(bond.id),
                    sign: 1.0,
                });
                rules[flow_var(bond.id)] = Some(Rule::StoredFlow {
                    state,
                    inertance: *inertance,
                    sign: bond.sign_into(id),
                });
            }
            ElementKind::R(_) | ElementKind::Mr(_) => {
                let bond = attached[0];
                let resistance = match &element.kind {
                    ElementKind::R(r) => Resistance::Linear(*r),
                    ElementKind::Mr(law) => Resistance::Law(law.clone(), signals),
                    _ => unreachable!(),
                };
                let sign = bond.sign_into(id);
                if causal.sets_effort(id, bond.id) {
                    rules[effort_var(bond.id)] = Some(Rule::ResistorEffort {
                        resistance,
                        flow: flow_var(bond.id),
                        sign,
                    });
                } else {
                    rules[flow_var(bond.id)] = Some(Rule::ResistorFlow {
                        resistance,
                        effort: effort_var(bond.id),
                        sign,
                    });
                }
            }
            ElementKind::Tf(m) => {
                let (b0, b1) = (attached[0], attached[1]);
                let sp = b0.sign_into(id) * -b1.sign_into(id);
                if causal.sets_effort(id, b1.id) {
                    rules[effort_var(b1.id)] = Some(Rule::Scaled {
                        from: effort_var(b0.id),
                        gain: 1.0 / m,
                    });
                    rules[flow_var(b0.id)] = Some(Rule::Scaled {
                        from: flow_var(b1.id),
                        gain: sp / m,
                    });
                } else {
                    rules[effort_var(b0.id)] = Some(Rule::Scaled {
                        from: effort_var(b1.id),
                        gain: *m,
                    });
                    rules[flow_var(b1.id)] = Some(Rule::Scaled {
                        from: flow_var(b0.id),
                        gain: sp * m,
                    });
                }
            }
            ElementKind::Gy(r) => {
                let (b0, b1) = (attached[0], attached[1]);
                let s0 = b0.sign_into(id);
                let s1 = -b1.sign_into(id);
                if causal.sets_effort(id, b0.id) {
                    rules[effort_var(b0.id)] = Some(Rule::Scaled {
                        from: flow_var(b1.id),
                        gain: r * s1,
                    });
                    rules[effort_var(b1.id)] = Some(Rule::Scaled {
                        from: flow_var(b0.id),
                        gain: r * s0,
                    });
                } else {
                    rules[flow_var(b1.id)] = Some(Rule::Scaled {
                        from: effort_var(b0.id),
                        gain: s1 / r,
                    });
                    rules[flow_var(b0.id)] = Some(Rule::Scaled {
                        from: effort_var(b1.id),
                        gain: s0 / r,
                    });
                }
            }
            ElementKind::J0 | ElementKind::J1 => {
                let one = matches!(element.kind, ElementKind::J1);
                // J0 receives its effort on the strong bond, J1 imposes it there
                let strong = attached
                    .iter()
                    .position(|b| causal.sets_effort(id, b.id) == one)
                    .expect("junction with a strong bond");
                let (shared, balanced): (VarIndex, VarIndex) = if one {
                    (flow_var, effort_var)
                } else {
                    (effort_var, flow_var)
                };
                let ks = attached[strong].sign_into(id);
                let mut terms = Vec::with_capacity(attached.len() - 1);
                for (i, bond) in attached.iter().enumerate() {
                    if i == strong {
                        continue;
                    }
                    rules[shared(bond.id)] = Some(Rule::Scaled {
                        from: shared(attached[strong].id),
                        gain: 1.0,
                    });
                    terms.push((balanced(bond.id), -ks * bond.sign_into(id)));
                }
                rules[balanced(attached[strong].id)] = Some(Rule::Sum { terms });
            }
        }
    }

    let rules: Vec<Rule> = rules
        .into_iter()
        .map(|r| r.expect("every bond variable has exactly one producer"))
        .collect();
    let order = evaluation_order(&rules)?;
    let ordered = order.into_iter().map(|v| (v, rules[v].clone())).collect();

    let observable_labels = bonds
        .iter()
        .flat_map(|b| [format!("e{}", b.id.number()), format!("f{}", b.id.number())])
        .collect();

    let dynamics = GraphDynamics {
        rules: ordered,
        var_count,
        rates,
    };
    Ok(StateSpaceModel::new(
        state_labels,
        input_labels,
        observable_labels,
        Arc::new(dynamics),
    )
    .with_nominal_inputs(nominal_inputs))
}

/// Depth-first topological order of the bond variables.
fn evaluation_order(rules: &[Rule]) -> Result<Vec<usize>, DeriveError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut marks = vec![Mark::New; rules.len()];
    let mut order = Vec::with_capacity(rules.len());

    for root in 0..rules.len() {
        if marks[root] != Mark::New {
            continue;
        }
        // explicit stack of (var, dependencies visited so far)
        let mut stack = vec![(root, 0usize)];
        marks[root] = Mark::Active;
        while let Some((var, next)) = stack.pop() {
            let deps = rules[var].dependencies();
            if next < deps.len() {
                stack.push((var, next + 1));
                let dep = deps[next];
                match marks[dep] {
                    Mark::Done => {}
                    Mark::Active => return Err(DeriveError::AlgebraicLoop(BondId(dep / 2 + 1))),
                    Mark::New => {
                        marks[dep] = Mark::Active;
                        stack.push((dep, 0));
                    }
                }
            } else {
                marks[var] = Mark::Done;
                order.push(var);
            }
        }
    }
    Ok(order)
}
