use thiserror::Error;

use crate::graph::{BondId, ElementId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("{kind} {name} must be strictly positive, got {value}")]
    NonPositiveParameter {
        kind: &'static str,
        name: &'static str,
        value: f64,
    },
    #[error("{kind} {name} must be finite")]
    NonFiniteParameter {
        kind: &'static str,
        name: &'static str,
    },
    #[error("port {port} of {element} is already bound")]
    PortAlreadyBound { element: ElementId, port: usize },
    #[error("{element} has no port {port}")]
    UnknownPort { element: ElementId, port: usize },
    #[error("unknown {0}")]
    UnknownElement(ElementId),
    #[error("unknown {0}")]
    UnknownBond(BondId),
    #[error("{0} does not accept signal links")]
    NotModulated(ElementId),
    #[error("graph has no elements")]
    Empty,
    #[error("{0} has unbound power ports")]
    DanglingPort(ElementId),
    #[error("{0} is not connected to the rest of the graph")]
    Disconnected(ElementId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CausalityError {
    #[error("malformed graph: {0}")]
    Malformed(#[from] GraphError),
    #[error("conflicting causal constraints at {0}")]
    CausalConflict(ElementId),
    #[error("{0} is forced into derivative causality")]
    DerivativeCausality(ElementId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeriveError {
    #[error("algebraic loop through {0}")]
    AlgebraicLoop(BondId),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("non-finite state at t = {time} s")]
    NonFiniteState { time: f64 },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} = {value} is invalid: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

impl ParamError {
    pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
        if value.is_finite() && value > 0.0 {
            Ok(())
        } else {
            Err(ParamError::Invalid {
                name,
                value,
                reason: "must be finite and > 0",
            })
        }
    }

    pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<(), ParamError> {
        if value.is_finite() && value >= 0.0 {
            Ok(())
        } else {
            Err(ParamError::Invalid {
                name,
                value,
                reason: "must be finite and >= 0",
            })
        }
    }
}
