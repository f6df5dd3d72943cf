//! Performance metrics, the F2 tuning sweep and Ce-to-BIS curves.

mod curve;
mod tuning;

pub use curve::{ce_at_bis, ce_bis_curve};
pub use tuning::{select_tf2, tune_tf2, MaintenanceTemplate, SweepResult};

use serde::Serialize;
use thiserror::Error;

use crate::sim::{Record, SimError, Trajectory};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {filtered} filtered vs {baseline} baseline")]
    LengthMismatch { filtered: usize, baseline: usize },
    #[error("baseline IAE must be > 0 (entry {index} is {value})")]
    NonPositiveBaseline { index: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("no tf2 in the grid meets threshold {threshold}")]
    NoFeasibleTf2 {
        threshold: f64,
        grid: Vec<f64>,
        d_values: Vec<f64>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Which BIS column a metric is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BisSignal {
    /// Patient BIS straight from the Hill curve (noise- and disturbance-free).
    #[default]
    True,
    /// Monitor output: true BIS plus disturbance and noise, clamped.
    Measured,
}

impl BisSignal {
    pub fn pick<T: Scalar>(self, r: &Record<T>) -> T {
        match self {
            BisSignal::True => r.bis_true,
            BisSignal::Measured => r.bis_measured,
        }
    }
}

/// Integral absolute error against `target` [BIS·min], trapezoidal rule on
/// the sample grid.
pub fn iae<T: Scalar>(traj: &Trajectory<T>, target: T, signal: BisSignal) -> T {
    let half = T::lit(0.5);
    traj.records
        .windows(2)
        .map(|w| {
            let e0 = (target - signal.pick(&w[0])).abs();
            let e1 = (target - signal.pick(&w[1])).abs();
            half * (e0 + e1) * (w[1].t - w[0].t)
        })
        .fold(T::zero(), |a, b| a + b)
}

/// Earliest time after which the true BIS stays within `target ± band` for
/// `hold` minutes and within `target ± 2·band` until the end of the run.
///
/// The hold window must fit inside the trajectory.
pub fn induction_time<T: Scalar>(traj: &Trajectory<T>, target: T, band: T, hold: T) -> Option<T> {
    let recs = &traj.records;
    let n = recs.len();
    if n == 0 {
        return None;
    }
    let wide = band + band;
    let t_end = recs[n - 1].t;
    let inside = |r: &Record<T>, b: T| (r.bis_true - target).abs() <= b;

    // suffix_ok[k]: every sample from k on is inside the wide band.
    // next_out[k]: index of the first sample >= k outside the narrow band.
    let mut suffix_ok = vec![false; n + 1];
    let mut next_out = vec![n; n + 1];
    suffix_ok[n] = true;
    for k in (0..n).rev() {
        suffix_ok[k] = suffix_ok[k + 1] && inside(&recs[k], wide);
        next_out[k] = if inside(&recs[k], band) { next_out[k + 1] } else { k };
    }
    let eps = T::lit(1e-9);
    (0..n).find_map(|k| {
        let t0 = recs[k].t;
        let window_end = t0 + hold;
        let held = next_out[k] == n || recs[next_out[k]].t > window_end + eps;
        (suffix_ok[k] && held && t_end + eps >= window_end).then_some(t0)
    })
}

/// Summary of one closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport<T> {
    pub iae: T,
    pub induction_time: Option<T>,
    /// Lowest true BIS at or after the first entry into the ±5 band.
    pub min_bis_post_crossing: Option<T>,
    /// |true BIS − target| at the last sample.
    pub steady_state_error: T,
    pub max_u: T,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn from_trajectory(traj: &Trajectory<T>, target: T) -> Result<Self, MetricsError> {
        let last = traj.last().ok_or(MetricsError::Empty)?;
        let band = T::lit(5.0);
        let first_entry = traj
            .records
            .iter()
            .position(|r| (r.bis_true - target).abs() <= band);
        let min_bis_post_crossing = first_entry.map(|k| {
            traj.records[k..]
                .iter()
                .map(|r| r.bis_true)
                .fold(T::infinity(), T::min)
        });
        Ok(Self {
            iae: iae(traj, target, BisSignal::True),
            induction_time: induction_time(traj, target, band, T::one()),
            min_bis_post_crossing,
            steady_state_error: (last.bis_true - target).abs(),
            max_u: traj.records.iter().map(|r| r.u).fold(T::zero(), T::max),
        })
    }
}

/// Worst-case relative IAE increase over patients.
pub fn degradation_ratio<T: Scalar>(filtered: &[T], baseline: &[T]) -> Result<T, MetricsError> {
    if filtered.is_empty() || baseline.is_empty() {
        return Err(MetricsError::Empty);
    }
    if filtered.len() != baseline.len() {
        return Err(MetricsError::LengthMismatch {
            filtered: filtered.len(),
            baseline: baseline.len(),
        });
    }
    let mut worst = T::neg_infinity();
    for (index, (&f, &b)) in filtered.iter().zip(baseline).enumerate() {
        if !(b > T::zero()) {
            return Err(MetricsError::NonPositiveBaseline {
                index,
                value: b.as_f64(),
            });
        }
        worst = worst.max((f - b) / b);
    }
    Ok(worst)
}
