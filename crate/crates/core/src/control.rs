//! Sinusoidal extension references and the PD supply-pressure law.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::ParamError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Sides driven in anti-phase: the body rotates.
    #[default]
    Bending,
    /// Sides driven in phase: the body extends and contracts.
    Extension,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Bending => "bending",
            Mode::Extension => "extension",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bending" => Ok(Mode::Bending),
            "extension" => Ok(Mode::Extension),
            other => Err(format!(
                "unknown mode `{other}` (expected bending or extension)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Proportional gain (Pa/m).
    pub kp: f64,
    /// Derivative gain (Pa·s/m).
    pub kd: f64,
    /// Reference amplitude (m).
    pub amplitude: f64,
    /// Reference angular frequency (rad/s).
    pub omega: f64,
    pub mode: Mode,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            kp: 40.0,
            kd: 10.0,
            amplitude: 0.3,
            omega: 1.0,
            mode: Mode::Bending,
        }
    }
}

impl ControlParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::check_non_negative("kp", self.kp)?;
        ParamError::check_non_negative("kd", self.kd)?;
        ParamError::check_non_negative("amplitude", self.amplitude)?;
        ParamError::check_positive("omega", self.omega)
    }
}

/// Reference extension `a·sin(ωt + φ)` and its rate `a·ω·cos(ωt + φ)`.
///
/// The phase is applied by angle addition on the sine and cosine of `ωt`, so
/// a phase of π yields the exact negation of the zero-phase reference up to
/// one rounding of `sin π`.
pub fn reference(amplitude: f64, omega: f64, phase: f64, t: f64) -> (f64, f64) {
    let (s, c) = (omega * t).sin_cos();
    let (sp, cp) = phase.sin_cos();
    let sine = s * cp + c * sp;
    let cosine = c * cp - s * sp;
    (amplitude * sine, amplitude * omega * cosine)
}

/// Reference phases `(left, right)` for a drive mode.
pub fn mode_phases(mode: Mode) -> (f64, f64) {
    match mode {
        Mode::Bending => (0.0, PI),
        Mode::Extension => (0.0, 0.0),
    }
}

/// PD supply pressure `kp (x_ref − x) + kd (v_ref − v)`.
pub fn pd_pressure(x_ref: f64, v_ref: f64, x: f64, v: f64, kp: f64, kd: f64) -> f64 {
    kp * (x_ref - x) + kd * (v_ref - v)
}

/// Both sides' PD loops with an optional symmetric supply limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdController {
    pub params: ControlParams,
    pub pressure_limit: Option<f64>,
}

impl PdController {
    pub fn new(params: ControlParams, pressure_limit: Option<f64>) -> Self {
        Self {
            params,
            pressure_limit,
        }
    }

    /// Left and right references at time `t`.
    pub fn references(&self, t: f64) -> [(f64, f64); 2] {
        let (left, right) = mode_phases(self.params.mode);
        let p = &self.params;
        [
            reference(p.amplitude, p.omega, left, t),
            reference(p.amplitude, p.omega, right, t),
        ]
    }

    /// Supply pressures `(P1_L, P1_R)` for the sides' extensions and rates.
    pub fn pressures(&self, t: f64, left: (f64, f64), right: (f64, f64)) -> (f64, f64) {
        let [ref_l, ref_r] = self.references(t);
        let p = &self.params;
        let p1_l = pd_pressure(ref_l.0, ref_l.1, left.0, left.1, p.kp, p.kd);
        let p1_r = pd_pressure(ref_r.0, ref_r.1, right.0, right.1, p.kp, p.kd);
        (self.limit(p1_l), self.limit(p1_r))
    }

    fn limit(&self, p1: f64) -> f64 {
        match self.pressure_limit {
            Some(limit) => p1.clamp(-limit, limit),
            None => p1,
        }
    }
}
