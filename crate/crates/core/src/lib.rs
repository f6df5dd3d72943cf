//! Closed-loop propofol anesthesia simulation.
//!
//! A virtual patient (three-compartment pharmacokinetics, effect site and a
//! Hill response mapping effect-site concentration to BIS) is driven by an
//! internal-model PI controller through a saturated infusion pump. The
//! modules are generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, with `*F32` variants for `f32`.
//!
//! ```
//! use anesthesia_core::{Scenario, VirtualPatient};
//! use anesthesia_core::patient::PkPreset;
//! use anesthesia_core::sim::run_closed_loop;
//!
//! let patient = VirtualPatient::builtin(13, PkPreset::SchniderCorrected).unwrap();
//! let mut scenario = Scenario::new(patient);
//! scenario.duration = 5.0;
//! let traj = run_closed_loop(&scenario).unwrap();
//! assert_eq!(traj.len(), 300);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod io;
pub mod metrics;
pub mod patient;
mod scalar;
pub mod sim;

pub use scalar::Scalar;

use thiserror::Error;

pub type Demographics = patient::Demographics<f64>;
pub type PkParams = patient::PkParams<f64>;
pub type HillParams = patient::HillParams<f64>;
pub type PatientState = patient::PatientState<f64>;
pub type VirtualPatient = patient::VirtualPatient<f64>;
pub type ControllerConfig = control::ControllerConfig<f64>;
pub type ControllerState = control::ControllerState<f64>;
pub type Scenario = sim::Scenario<f64>;
pub type ClosedLoopSim = sim::ClosedLoopSim<f64>;
pub type Record = sim::Record<f64>;
pub type Trajectory = sim::Trajectory<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type SweepResult = metrics::SweepResult<f64>;

pub type DemographicsF32 = patient::Demographics<f32>;
pub type PkParamsF32 = patient::PkParams<f32>;
pub type HillParamsF32 = patient::HillParams<f32>;
pub type PatientStateF32 = patient::PatientState<f32>;
pub type VirtualPatientF32 = patient::VirtualPatient<f32>;
pub type ControllerConfigF32 = control::ControllerConfig<f32>;
pub type ControllerStateF32 = control::ControllerState<f32>;
pub type ScenarioF32 = sim::Scenario<f32>;
pub type ClosedLoopSimF32 = sim::ClosedLoopSim<f32>;
pub type RecordF32 = sim::Record<f32>;
pub type TrajectoryF32 = sim::Trajectory<f32>;
pub type MetricsReportF32 = metrics::MetricsReport<f32>;
pub type SweepResultF32 = metrics::SweepResult<f32>;

/// Any failure surfaced to a front end, grouped into classes that map onto
/// distinct process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] io::ParseError),
    #[error(transparent)]
    Model(#[from] patient::ModelError),
    #[error(transparent)]
    Control(#[from] control::ControlError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Plot(#[from] io::PlotError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 1 I/O, 2 invalid input, 3 model, 4 controller,
    /// 5 metrics, 6 plotting.
    pub fn exit_code(&self) -> i32 {
        use sim::SimErrorKind;
        match self {
            Error::Io { .. } => 1,
            Error::Parse(io::ParseError::Model(_)) => 3,
            Error::Parse(_) => 2,
            Error::Model(_) => 3,
            Error::Control(_) => 4,
            Error::Sim(e) => match e.kind {
                SimErrorKind::InvalidScenario { .. } => 2,
                SimErrorKind::Model(_) => 3,
                SimErrorKind::Control(_) => 4,
            },
            Error::Metrics(metrics::MetricsError::Sim(e)) => Error::Sim(e.clone()).exit_code(),
            Error::Metrics(_) => 5,
            Error::Plot(_) => 6,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_per_class() {
        let parse = Error::from(io::ParseError::UnknownPatient(14));
        let model = Error::from(patient::ModelError::IntegrationDiverged);
        let control = Error::from(control::ControlError::Diverged);
        let metrics = Error::from(metrics::MetricsError::Empty);
        let plot = Error::from(io::PlotError::NoSeries);
        let ioe = Error::io("x", std::io::Error::other("boom"));
        let codes: Vec<i32> = [parse, model, control, metrics, plot, ioe].iter().map(Error::exit_code).collect();
        assert_eq!(codes, vec![2, 3, 4, 5, 6, 1]);
    }
}
