//! Elastic packet (bellow) and two-sided actuator models.
//!
//! A packet is a pneumatic chamber filled through an orifice from a supply
//! pressure `P1`. The chamber pressure `P2` pushes a spring-damper-mass with
//! area `A`:
//!
//! ```text
//! dP2/dt = q(P1 - P2) / (C1 + C2)
//! m dv/dt = P2 A - Rb v - k x
//! ```
//!
//! with the orifice flow `q(Δp) = Cd D sign(Δp) √|Δp|`, the volume
//! capacitance `C1 = A²/k` and the gas capacitance `C2 = A L / (ρ R T)`.
//! The chamber drives the mechanics without back-flow from the piston unless
//! `volume_coupled` is set.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::error::{GraphError, ParamError};
use crate::graph::{BondGraph, BondId, ElementId, ElementKind, ResistiveLaw, Signal, SignalLaw};
use crate::model::{Dynamics, StateSpaceModel};

/// Half-width of the pressure band (Pa) in which the orifice law is linear.
pub const ORIFICE_REGULARIZATION: f64 = 1e-6;

/// Lower bound (m) on the gas-column length used by the gas capacitance.
pub const MIN_COLUMN_LENGTH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("non-finite packet state")]
pub struct NonFiniteState;

/// Orifice volume flow from `p_up` to `p_down`.
pub fn orifice_flow(p_up: f64, p_down: f64, cd: f64, d: f64) -> f64 {
    orifice_flow_dp(p_up - p_down, cd, d)
}

fn orifice_flow_dp(dp: f64, cd: f64, d: f64) -> f64 {
    let gain = cd * d;
    let magnitude = dp.abs();
    if magnitude < ORIFICE_REGULARIZATION {
        // slope matched to the square-root law at the band edge
        gain * dp / ORIFICE_REGULARIZATION.sqrt()
    } else {
        gain * magnitude.sqrt().copysign(dp)
    }
}

/// Pressure drop that drives `flow` through the orifice (inverse of [`orifice_flow`]).
fn orifice_drop(flow: f64, cd: f64, d: f64) -> f64 {
    let gain = cd * d;
    let edge = gain * ORIFICE_REGULARIZATION.sqrt();
    if flow.abs() < edge {
        flow * ORIFICE_REGULARIZATION.sqrt() / gain
    } else {
        let ratio = flow / gain;
        ratio * ratio.abs()
    }
}

/// Orifice resistance `√|Δp| / (Cd D)`.
pub fn orifice_resistance(p_up: f64, p_down: f64, cd: f64, d: f64) -> f64 {
    (p_up - p_down).abs().sqrt() / (cd * d)
}

/// Capacitance from the packet's volume change, `A² / k`.
pub fn volume_capacitance(area: f64, stiffness: f64) -> f64 {
    area * area / stiffness
}

/// Capacitance from air compressibility, `A L / (ρ R T)`, with `L` clamped
/// to at least [`MIN_COLUMN_LENGTH`].
pub fn gas_capacitance(area: f64, length: f64, rho: f64, r_gas: f64, temperature: f64) -> f64 {
    area * length.max(MIN_COLUMN_LENGTH) / (rho * r_gas * temperature)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C2Mode {
    /// Gas column fixed at `L0`.
    #[default]
    Constant,
    /// Gas column `L0 + x`.
    StateDependent,
}

impl C2Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            C2Mode::Constant => "constant",
            C2Mode::StateDependent => "state_dependent",
        }
    }
}

impl fmt::Display for C2Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for C2Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(C2Mode::Constant),
            "state_dependent" => Ok(C2Mode::StateDependent),
            other => Err(format!(
                "unknown c2_mode `{other}` (expected constant or state_dependent)"
            )),
        }
    }
}

/// Physical constants of one elastic packet. SI units throughout; the gas
/// constant is taken as given (J/(K·mol) in the default set).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub discharge_coefficient: f64,
    pub orifice_diameter: f64,
    pub area: f64,
    pub air_density: f64,
    pub gas_constant: f64,
    pub temperature: f64,
    /// Nominal gas-column length `L0` used by the gas capacitance.
    pub column_length: f64,
    pub c2_mode: C2Mode,
    /// Subtract the piston displacement flow `A v` from the orifice flow.
    pub volume_coupled: bool,
}

impl Default for PacketParams {
    fn default() -> Self {
        Self {
            mass: 0.015,
            damping: 0.4,
            stiffness: 350.0,
            discharge_coefficient: 0.8,
            orifice_diameter: 0.008,
            area: 0.0096,
            air_density: 1.225,
            gas_constant: 8.31451,
            temperature: 300.0,
            column_length: 0.3,
            c2_mode: C2Mode::Constant,
            volume_coupled: false,
        }
    }
}

impl PacketParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::check_positive("m", self.mass)?;
        ParamError::check_positive("rb", self.damping)?;
        ParamError::check_positive("k", self.stiffness)?;
        ParamError::check_positive("cd", self.discharge_coefficient)?;
        ParamError::check_positive("d_orifice", self.orifice_diameter)?;
        ParamError::check_positive("area", self.area)?;
        ParamError::check_positive("rho", self.air_density)?;
        ParamError::check_positive("r_gas", self.gas_constant)?;
        ParamError::check_positive("temperature", self.temperature)?;
        ParamError::check_positive("l0", self.column_length)?;
        Ok(())
    }

    pub fn volume_capacitance(&self) -> f64 {
        volume_capacitance(self.area, self.stiffness)
    }

    /// Gas-column length at extension `x`.
    pub fn column_length_at(&self, x: f64) -> f64 {
        match self.c2_mode {
            C2Mode::Constant => self.column_length,
            C2Mode::StateDependent => (self.column_length + x).max(MIN_COLUMN_LENGTH),
        }
    }

    pub fn gas_capacitance_at(&self, x: f64) -> f64 {
        gas_capacitance(
            self.area,
            self.column_length_at(x),
            self.air_density,
            self.gas_constant,
            self.temperature,
        )
    }

    /// `C1 + C2` at extension `x`.
    pub fn total_capacitance_at(&self, x: f64) -> f64 {
        self.volume_capacitance() + self.gas_capacitance_at(x)
    }

    /// Undamped natural frequency of the mechanical part, `√(k/m)`.
    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt()
    }

    pub fn damping_ratio(&self) -> f64 {
        self.damping / (2.0 * (self.stiffness * self.mass).sqrt())
    }
}

/// Extension, extension rate and gauge chamber pressure of one packet.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PacketState {
    pub x: f64,
    pub v: f64,
    pub p2: f64,
}

impl PacketState {
    pub fn new(x: f64, v: f64, p2: f64) -> Self {
        Self { x, v, p2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite() && self.p2.is_finite()
    }

    /// Kinetic, elastic and pneumatic energy `½mv² + ½kx² + ½(C1+C2)P2²`.
    pub fn stored_energy(&self, p: &PacketParams) -> f64 {
        0.5 * p.mass * self.v * self.v
            + 0.5 * p.stiffness * self.x * self.x
            + 0.5 * p.total_capacitance_at(self.x) * self.p2 * self.p2
    }
}

fn packet_rates(s: PacketState, p1: f64, p: &PacketParams) -> PacketState {
    let mut flow = orifice_flow(p1, s.p2, p.discharge_coefficient, p.orifice_diameter);
    if p.volume_coupled {
        flow -= p.area * s.v;
    }
    PacketState {
        x: s.v,
        v: (s.p2 * p.area - p.damping * s.v - p.stiffness * s.x) / p.mass,
        p2: flow / p.total_capacitance_at(s.x),
    }
}

/// Time derivative of a packet state under supply pressure `p1`.
pub fn packet_derivatives(
    state: PacketState,
    p1: f64,
    params: &PacketParams,
) -> Result<PacketState, NonFiniteState> {
    if !state.is_finite() || !p1.is_finite() {
        return Err(NonFiniteState);
    }
    let rates = packet_rates(state, p1, params);
    if rates.is_finite() {
        Ok(rates)
    } else {
        Err(NonFiniteState)
    }
}

/// Static extension under a constant supply, `P1 A / k`.
pub fn steady_state_extension(p1: f64, params: &PacketParams) -> f64 {
    p1 * params.area / params.stiffness
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorParams {
    pub left: PacketParams,
    pub right: PacketParams,
    /// Transformer coefficient between side extensions and body rotation.
    pub mu: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self::symmetric(PacketParams::default(), 2.5)
    }
}

impl ActuatorParams {
    pub fn symmetric(packet: PacketParams, mu: f64) -> Self {
        Self {
            left: packet,
            right: packet,
            mu,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        self.left.validate()?;
        self.right.validate()?;
        ParamError::check_positive("mu", self.mu)
    }
}

/// Heave, pitch and pitch torque of the actuator body.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyOutputs {
    /// Linear displacement (m).
    pub z: f64,
    /// Rotation angle (rad).
    pub theta: f64,
    /// Torque (N·m).
    pub tau: f64,
}

/// Half-car pairing of the two sides: `z = (xL + xR)/2`, `θ = μ(xL − xR)`,
/// `τ = (A_L P2L − A_R P2R)/μ`.
pub fn body_outputs(
    x_l: f64,
    x_r: f64,
    p2_l: f64,
    p2_r: f64,
    params: &ActuatorParams,
) -> BodyOutputs {
    BodyOutputs {
        z: 0.5 * (x_l + x_r),
        theta: params.mu * (x_l - x_r),
        tau: (params.left.area * p2_l - params.right.area * p2_r) / params.mu,
    }
}

struct PacketDynamics {
    params: PacketParams,
}

impl Dynamics for PacketDynamics {
    fn derivatives(&self, _t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        let r = packet_rates(PacketState::new(x[0], x[1], x[2]), u[0], &self.params);
        out.copy_from_slice(&[r.x, r.v, r.p2]);
    }

    fn observables(&self, _t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[..3].copy_from_slice(x);
        out[3] = u[0];
    }
}

/// Single packet with states `x, v, P2`, input `P1` and the states plus `P1`
/// as observables.
pub fn packet_model(params: &PacketParams) -> StateSpaceModel {
    let labels = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    StateSpaceModel::new(
        labels(&["x", "v", "P2"]),
        labels(&["P1"]),
        labels(&["x", "v", "P2", "P1"]),
        Arc::new(PacketDynamics { params: *params }),
    )
}

/// State labels of [`assemble_actuator`].
pub const ACTUATOR_STATES: [&str; 6] = ["x_L", "v_L", "P2_L", "x_R", "v_R", "P2_R"];
/// Input labels of [`assemble_actuator`].
pub const ACTUATOR_INPUTS: [&str; 2] = ["P1_L", "P1_R"];
/// Observable labels of [`assemble_actuator`].
pub const ACTUATOR_OBSERVABLES: [&str; 11] = [
    "x_L", "v_L", "P2_L", "x_R", "v_R", "P2_R", "P1_L", "P1_R", "z", "theta", "tau",
];

struct ActuatorDynamics {
    params: ActuatorParams,
}

impl Dynamics for ActuatorDynamics {
    fn derivatives(&self, _t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        let left = packet_rates(PacketState::new(x[0], x[1], x[2]), u[0], &self.params.left);
        let right = packet_rates(PacketState::new(x[3], x[4], x[5]), u[1], &self.params.right);
        out.copy_from_slice(&[left.x, left.v, left.p2, right.x, right.v, right.p2]);
    }

    fn observables(&self, _t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        let body = body_outputs(x[0], x[3], x[2], x[5], &self.params);
        out[..6].copy_from_slice(x);
        out[6] = u[0];
        out[7] = u[1];
        out[8] = body.z;
        out[9] = body.theta;
        out[10] = body.tau;
    }
}

/// Two packets side by side, each fed by its own supply pressure.
///
/// States are [`ACTUATOR_STATES`], inputs [`ACTUATOR_INPUTS`] and observables
/// [`ACTUATOR_OBSERVABLES`]. The sides are dynamically independent; they are
/// coupled only through the body outputs.
pub fn assemble_actuator(params: &ActuatorParams) -> StateSpaceModel {
    let labels = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    StateSpaceModel::new(
        labels(&ACTUATOR_STATES),
        labels(&ACTUATOR_INPUTS),
        labels(&ACTUATOR_OBSERVABLES),
        Arc::new(ActuatorDynamics { params: *params }),
    )
}

/// Orifice as a nonlinear resistor for bond-graph use.
#[derive(Debug, Clone, Copy)]
pub struct OrificeLaw {
    pub discharge_coefficient: f64,
    pub diameter: f64,
}

impl ResistiveLaw for OrificeLaw {
    fn flow(&self, effort: f64, _signals: &[f64]) -> f64 {
        orifice_flow_dp(effort, self.discharge_coefficient, self.diameter)
    }

    fn effort(&self, flow: f64, _signals: &[f64]) -> f64 {
        orifice_drop(flow, self.discharge_coefficient, self.diameter)
    }
}

/// Bond graph of one packet and the handles needed to read it.
///
/// ```text
/// SE(P1) -1-> 1 -2-> MR(orifice)
///             1 -3-> C(C1 + C2)          effort of bond 3 is P2
/// MSE(A·e3) -4-> 1 -5-> I(m)
///                1 -6-> R(Rb)
///                1 -7-> C(1/k)           displacement is x
/// ```
///
/// States of the derived model are `[q_chamber, p_mass, q_spring]`, i.e. the
/// chamber volume `(C1+C2)·P2`, the momentum `m v` and the extension `x`.
/// The single input is the supply pressure `supply`.
#[derive(Debug, Clone)]
pub struct BellowTemplate {
    pub graph: BondGraph,
    pub supply: ElementId,
    pub chamber: ElementId,
    pub pressure_bond: BondId,
    pub spring_bond: BondId,
    params: PacketParams,
}

impl BellowTemplate {
    /// Maps a packet state onto the template's state vector.
    pub fn to_graph_state(&self, s: PacketState) -> [f64; 3] {
        let c = self.params.total_capacitance_at(s.x);
        [c * s.p2, self.params.mass * s.v, s.x]
    }

    /// Maps template state rates back to `(dx/dt, dv/dt, dP2/dt)`. Exact for
    /// the constant gas capacitance only.
    pub fn rates_to_packet(&self, state: &[f64], rates: &[f64]) -> PacketState {
        let c = self.params.total_capacitance_at(state[2]);
        PacketState {
            x: rates[2],
            v: rates[1] / self.params.mass,
            p2: rates[0] / c,
        }
    }
}

/// Builds the bellow graph. With a state-dependent gas capacitance the
/// chamber is a modulated capacitor reading the spring effort `k x`.
pub fn bellow_template(params: &PacketParams) -> BellowTemplate {
    build_bellow(*params).expect("bellow template topology is well formed")
}

fn build_bellow(p: PacketParams) -> Result<BellowTemplate, GraphError> {
    let mut g = BondGraph::new();
    let supply = g.add_labeled(ElementKind::Se(0.0), "supply")?;
    let pneumatic = g.add_labeled(ElementKind::J1, "pneumatic")?;
    let orifice = g.add_labeled(
        ElementKind::Mr(Arc::new(OrificeLaw {
            discharge_coefficient: p.discharge_coefficient,
            diameter: p.orifice_diameter,
        })),
        "orifice",
    )?;
    let chamber_kind = match p.c2_mode {
        C2Mode::Constant => ElementKind::C(p.total_capacitance_at(0.0)),
        C2Mode::StateDependent => {
            let law: SignalLaw =
                Arc::new(move |s: &[f64]| p.total_capacitance_at(s[0] / p.stiffness));
            ElementKind::Mc(law)
        }
    };
    let chamber = g.add_labeled(chamber_kind, "chamber")?;
    let area = p.area;
    let piston_law: SignalLaw = Arc::new(move |s: &[f64]| s[0] * area);
    let piston = g.add_labeled(ElementKind::Mse(piston_law), "piston")?;
    let mechanical = g.add_labeled(ElementKind::J1, "mechanical")?;
    let mass = g.add_labeled(ElementKind::I(p.mass), "mass")?;
    let damping = g.add_labeled(ElementKind::R(p.damping), "damping")?;
    let spring = g.add_labeled(ElementKind::C(1.0 / p.stiffness), "spring")?;

    g.bond(supply, pneumatic)?;
    g.bond(pneumatic, orifice)?;
    let pressure_bond = g.bond(pneumatic, chamber)?;
    g.bond(piston, mechanical)?;
    g.bond(mechanical, mass)?;
    g.bond(mechanical, damping)?;
    let spring_bond = g.bond(mechanical, spring)?;

    g.link(Signal::Effort(pressure_bond), piston)?;
    if p.c2_mode == C2Mode::StateDependent {
        g.link(Signal::Effort(spring_bond), chamber)?;
    }
    Ok(BellowTemplate {
        graph: g,
        supply,
        chamber,
        pressure_bond,
        spring_bond,
        params: p,
    })
}
