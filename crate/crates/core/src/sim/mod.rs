//! Closed- and open-loop simulation of a virtual patient.

mod engine;
mod profile;
mod trajectory;

pub use engine::{
    run_closed_loop, run_many, run_open_loop, ClosedLoopSim, ModelDemographics, Scenario,
};
pub use profile::{noise_sample, DisturbanceProfile, InfusionProfile, NoiseKind, NoiseModel, Pulse};
pub use trajectory::{Record, Trajectory};

use thiserror::Error;

use crate::control::ControlError;
use crate::patient::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimErrorKind {
    #[error("invalid scenario: {field} {constraint}")]
    InvalidScenario {
        field: &'static str,
        constraint: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// A failed run, tagged with the step at which it stopped.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("simulation failed at step {step}: {kind}")]
pub struct SimError {
    pub step: usize,
    pub kind: SimErrorKind,
}

impl SimError {
    pub(crate) fn at(step: usize, kind: impl Into<SimErrorKind>) -> Self {
        Self {
            step,
            kind: kind.into(),
        }
    }
}
