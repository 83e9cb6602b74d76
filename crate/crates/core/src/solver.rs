//! Fixed-step explicit integration with zero-order-held inputs.

use std::fmt;
use std::str::FromStr;

use crate::error::SolverError;
use crate::model::StateSpaceModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(format!("unknown solver `{other}` (expected euler or rk4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            dt: 1e-4,
            t_end: 20.0,
            record_stride: 100,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SolverError::InvalidOptions(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(SolverError::InvalidOptions(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(SolverError::InvalidOptions(
                "record_stride must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of whole steps of length `dt` that fit in `[0, t_end]`,
    /// treating a ratio within 1e-9 of an integer as that integer.
    pub fn full_steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.floor() as usize
        }
    }

    /// Number of recorded rows: `floor(t_end / (dt·stride)) + 1`.
    pub fn recorded_rows(&self) -> usize {
        self.full_steps() / self.record_stride + 1
    }
}

/// Recorded samples of a run. Rows are aligned across all matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub observables: Vec<Vec<f64>>,
    /// Time reached after the last (possibly partial) step.
    pub final_time: f64,
    pub final_state: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column `index` of the state matrix.
    pub fn state_column(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|row| row[index]).collect()
    }

    pub fn observable_column(&self, index: usize) -> Vec<f64> {
        self.observables.iter().map(|row| row[index]).collect()
    }
}

fn axpy(out: &mut [f64], x: &[f64], a: f64, k: &[f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// One explicit step with inputs held constant over `[t, t + dt]`.
pub fn step(
    model: &StateSpaceModel,
    t: f64,
    state: &[f64],
    inputs: &[f64],
    dt: f64,
    method: Method,
) -> Result<Vec<f64>, SolverError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SolverError::InvalidOptions(format!(
            "dt must be > 0, got {dt}"
        )));
    }
    if state.len() != model.state_dim() {
        return Err(SolverError::DimensionMismatch {
            expected: model.state_dim(),
            actual: state.len(),
        });
    }
    if inputs.len() != model.input_dim() {
        return Err(SolverError::DimensionMismatch {
            expected: model.input_dim(),
            actual: inputs.len(),
        });
    }

    let n = state.len();
    let mut next = vec![0.0; n];
    match method {
        Method::Euler => {
            let mut k1 = vec![0.0; n];
            model.derivatives_into(t, state, inputs, &mut k1);
            axpy(&mut next, state, dt, &k1);
        }
        Method::Rk4 => {
            let mut k1 = vec![0.0; n];
            let mut k2 = vec![0.0; n];
            let mut k3 = vec![0.0; n];
            let mut k4 = vec![0.0; n];
            let mut stage = vec![0.0; n];
            let half = 0.5 * dt;
            model.derivatives_into(t, state, inputs, &mut k1);
            axpy(&mut stage, state, half, &k1);
            model.derivatives_into(t + half, &stage, inputs, &mut k2);
            axpy(&mut stage, state, half, &k2);
            model.derivatives_into(t + half, &stage, inputs, &mut k3);
            axpy(&mut stage, state, dt, &k3);
            model.derivatives_into(t + dt, &stage, inputs, &mut k4);
            let sixth = dt / 6.0;
            for i in 0..n {
                next[i] = state[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }

    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(SolverError::NonFiniteState { time: t + dt })
    }
}

/// Integrates from `t = 0` to `options.t_end`.
///
/// Before every step `input_fn(t, observables)` supplies the inputs held over
/// that step. The observables it sees are evaluated with the inputs of the
/// previous step (zeros before the first), so a controller reading states
/// through observables closes the loop without an algebraic dependency.
/// Rows are recorded every `record_stride` whole steps; when `t_end` is not a
/// multiple of `dt` a final partial step is taken but not recorded.
pub fn integrate<F>(
    model: &StateSpaceModel,
    state0: &[f64],
    mut input_fn: F,
    options: &SolverOptions,
) -> Result<Trajectory, SolverError>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    options.validate()?;
    if state0.len() != model.state_dim() {
        return Err(SolverError::DimensionMismatch {
            expected: model.state_dim(),
            actual: state0.len(),
        });
    }
    if !state0.iter().all(|v| v.is_finite()) {
        return Err(SolverError::NonFiniteState { time: 0.0 });
    }

    let steps = options.full_steps();
    let rows = options.recorded_rows();
    let mut trajectory = Trajectory {
        times: Vec::with_capacity(rows),
        states: Vec::with_capacity(rows),
        inputs: Vec::with_capacity(rows),
        observables: Vec::with_capacity(rows),
        final_time: 0.0,
        final_state: Vec::new(),
    };

    let mut state = state0.to_vec();
    let mut held = vec![0.0; model.input_dim()];
    let mut observed = vec![0.0; model.observable_dim()];

    let mut sample = |t: f64, state: &[f64], held: &mut Vec<f64>| -> Result<(), SolverError> {
        model.observables_into(t, state, held, &mut observed);
        let inputs = input_fn(t, &observed);
        if inputs.len() != model.input_dim() {
            return Err(SolverError::DimensionMismatch {
                expected: model.input_dim(),
                actual: inputs.len(),
            });
        }
        *held = inputs;
        Ok(())
    };

    for n in 0..=steps {
        let t = n as f64 * options.dt;
        sample(t, &state, &mut held)?;
        if n % options.record_stride == 0 {
            trajectory.times.push(t);
            trajectory.states.push(state.clone());
            trajectory.inputs.push(held.clone());
            trajectory
                .observables
                .push(model.observables(t, &state, &held));
        }
        if n == steps {
            break;
        }
        state = step(model, t, &state, &held, options.dt, options.method)?;
    }

    let mut t = steps as f64 * options.dt;
    let remainder = options.t_end - t;
    if remainder > 1e-12 * options.dt {
        state = step(model, t, &state, &held, remainder, options.method)?;
        t = options.t_end;
    }
    trajectory.final_time = t;
    trajectory.final_state = state;
    Ok(trajectory)
}
