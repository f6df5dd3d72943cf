//! Propofol virtual patient: demographics, three-compartment PK with an
//! effect site, the Hill PD curve and the built-in 13-patient cohort.

mod cohort;
mod demographics;
mod pd;
mod pk;

pub use cohort::{
    builtin_cohort, cohort_csv, cohort_tsv, CohortRow, VirtualPatient, AVERAGE_PATIENT_ID, COHORT_TABLE,
};
pub use demographics::{lean_body_mass, Demographics, Sex};
pub use pd::{hill_bis, HillParams};
pub use pk::{pk_derivatives, step_rk4, PatientState, PkParams, PkPreset, KE0_DEFAULT};

use thiserror::Error;

/// Errors raised while building or integrating a patient model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid demographics: {field} {constraint} (got {value})")]
    InvalidDemographics {
        field: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("non-physical LBM: {value} kg")]
    NonPhysicalLbm { value: f64 },
    #[error("non-physical PK parameters: {name} = {value}")]
    NonPhysicalPk { name: &'static str, value: f64 },
    #[error("invalid Hill parameters: {field} {constraint} (got {value})")]
    InvalidHill {
        field: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("integration diverged")]
    IntegrationDiverged,
    #[error("unknown patient id {0}")]
    UnknownPatient(u32),
}
