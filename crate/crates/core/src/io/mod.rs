//! File formats: scenario JSON, trajectory/metrics CSV and SVG line plots.

mod csv;
mod scenario_file;
mod svg;

pub use self::csv::{
    cohort_metrics_csv, curve_csv, fmt_sig6, parse_trajectory_csv, sweep_csv, write_trajectory_csv,
    CohortMetricsRow,
};
pub use scenario_file::{
    parse_scenario, scenario_to_json, ControllerFile, DemographicsFile, InductionFile,
    ModelDemographicsFile, NoiseFile, PatientFile, PopulationFile, PulseFile, ScenarioFile,
};
pub use svg::{render_svg_plot, PlotSpec, Series};

use serde::Serialize;
use thiserror::Error;

use crate::patient::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("malformed input: {0}")]
    Syntax(String),
    #[error("unknown key: {0}")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {constraint}")]
    Invalid { key: String, constraint: String },
    #[error("unknown patient id {0}")]
    UnknownPatient(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ParseError {
    pub(crate) fn invalid(key: impl Into<String>, constraint: impl Into<String>) -> Self {
        Self::Invalid {
            key: key.into(),
            constraint: constraint.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlotError {
    #[error("series `{0}` is empty")]
    EmptySeries(String),
    #[error("series `{0}` contains a non-finite value")]
    NonFinite(String),
    #[error("nothing to plot")]
    NoSeries,
}

/// Pretty-printed JSON for reports and sweep results.
pub fn to_json<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}
