//! Model-based BIS controller: F1 pre-filter, inverse Hill with population
//! parameters, an internal patient model corrected by an innovation signal
//! filtered through F2, and a saturated PI tracking law on effect-site
//! concentration.

mod controller;
mod filter;
mod hill;

pub use controller::{
    controller_step, saturate, ControlOutput, ControllerConfig, ControllerState, InductionSchedule,
    Phase, Saturation,
};
pub use filter::Lp2;
pub use hill::{inverse_hill, NominalHill, PopulationHill};

use thiserror::Error;

use crate::patient::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("inverse Hill out of domain: emax - e0 + bis = {denominator}")]
    InverseHillDomain { denominator: f64 },
    #[error("invalid controller config: {field} {constraint} (got {value})")]
    InvalidConfig {
        field: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("controller state diverged")]
    Diverged,
    #[error("internal model: {0}")]
    Model(#[from] ModelError),
}
