use std::fmt;
use std::sync::Arc;

/// Right-hand side of a first-order system with observables.
///
/// Implementations must be pure: equal arguments give bit-identical output.
pub trait Dynamics: Send + Sync {
    fn derivatives(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]);
    fn observables(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]);
}

/// An executable model: labelled states, inputs and observables around a
/// shared [`Dynamics`] evaluator.
#[derive(Clone)]
pub struct StateSpaceModel {
    state_labels: Vec<String>,
    input_labels: Vec<String>,
    observable_labels: Vec<String>,
    nominal_inputs: Vec<f64>,
    dynamics: Arc<dyn Dynamics>,
}

impl StateSpaceModel {
    pub fn new(
        state_labels: Vec<String>,
        input_labels: Vec<String>,
        observable_labels: Vec<String>,
        dynamics: Arc<dyn Dynamics>,
    ) -> Self {
        let nominal_inputs = vec![0.0; input_labels.len()];
        Self {
            state_labels,
            input_labels,
            observable_labels,
            nominal_inputs,
            dynamics,
        }
    }

    pub fn with_nominal_inputs(mut self, nominal: Vec<f64>) -> Self {
        assert_eq!(nominal.len(), self.input_labels.len());
        self.nominal_inputs = nominal;
        self
    }

    pub fn state_dim(&self) -> usize {
        self.state_labels.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_labels.len()
    }

    pub fn observable_dim(&self) -> usize {
        self.observable_labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn observable_labels(&self) -> &[String] {
        &self.observable_labels
    }

    /// Input values implied by the model's own parameters (source constants,
    /// zero for external signals).
    pub fn nominal_inputs(&self) -> &[f64] {
        &self.nominal_inputs
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.state_labels.iter().position(|l| l == label)
    }

    pub fn input_index(&self, label: &str) -> Option<usize> {
        self.input_labels.iter().position(|l| l == label)
    }

    pub fn observable_index(&self, label: &str) -> Option<usize> {
        self.observable_labels.iter().position(|l| l == label)
    }

    pub fn derivatives_into(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(state.len(), self.state_dim());
        debug_assert_eq!(inputs.len(), self.input_dim());
        self.dynamics.derivatives(t, state, inputs, out);
    }

    pub fn derivatives(&self, t: f64, state: &[f64], inputs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        self.derivatives_into(t, state, inputs, &mut out);
        out
    }

    pub fn observables_into(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.observable_dim());
        self.dynamics.observables(t, state, inputs, out);
    }

    pub fn observables(&self, t: f64, state: &[f64], inputs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.observable_dim()];
        self.observables_into(t, state, inputs, &mut out);
        out
    }
}

impl fmt::Debug for StateSpaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateSpaceModel")
            .field("states", &self.state_labels)
            .field("inputs", &self.input_labels)
            .field("observables", &self.observable_labels)
            .finish_non_exhaustive()
    }
}

/// A model from plain closures, mostly for tests and small examples.
pub struct FnDynamics<D, O> {
    pub derivatives: D,
    pub observables: O,
}

impl<D, O> Dynamics for FnDynamics<D, O>
where
    D: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync,
    O: Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync,
{
    fn derivatives(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        (self.derivatives)(t, state, inputs, out)
    }

    fn observables(&self, t: f64, state: &[f64], inputs: &[f64], out: &mut [f64]) {
        (self.observables)(t, state, inputs, out)
    }
}

impl StateSpaceModel {
    /// Builds a model with no inputs whose observables are the states.
    pub fn autonomous<D>(state_labels: &[&str], derivatives: D) -> Self
    where
        D: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let labels: Vec<String> = state_labels.iter().map(|s| s.to_string()).collect();
        let dynamics = FnDynamics {
            derivatives: move |t: f64, x: &[f64], _u: &[f64], dx: &mut [f64]| derivatives(t, x, dx),
            observables: |_t: f64, x: &[f64], _u: &[f64], y: &mut [f64]| y.copy_from_slice(x),
        };
        StateSpaceModel::new(labels.clone(), Vec::new(), labels, Arc::new(dynamics))
    }
}
