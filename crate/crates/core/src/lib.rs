//! Bond-graph modelling and simulation of soft pneumatic actuators.
//!
//! The [`graph`], [`causality`] and [`derive`] modules turn an acausal bond
//! graph into an executable [`StateSpaceModel`]; [`solver`] integrates it with
//! fixed-step explicit methods. [`actuator`] and [`control`] hold the elastic
//! packet model, the two-sided actuator and its PD pressure loop.

pub mod actuator;
pub mod causality;
pub mod control;
pub mod derive;
pub mod error;
pub mod graph;
pub mod model;
pub mod solver;

pub use actuator::{
    assemble_actuator, bellow_template, body_outputs, packet_derivatives, packet_model,
    ActuatorParams, BellowTemplate, BodyOutputs, C2Mode, PacketParams, PacketState,
};
pub use causality::{assign_causality, CausalGraph};
pub use control::{ControlParams, Mode, PdController};
pub use derive::derive_state_equations;
pub use error::{CausalityError, DeriveError, GraphError, ParamError, SolverError};
pub use graph::{BondGraph, BondId, ElementId, ElementKind, Port, Signal};
pub use model::{Dynamics, StateSpaceModel};
pub use solver::{integrate, step, Method, SolverOptions, Trajectory};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Causality(#[from] CausalityError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
}

/// Assigns causality and derives the state equations in one go.
pub fn compile(graph: &BondGraph) -> Result<StateSpaceModel, CompileError> {
    let causal = assign_causality(graph)?;
    Ok(derive_state_equations(&causal)?)
}
