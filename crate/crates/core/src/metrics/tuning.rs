use rayon::prelude::*;
use serde::Serialize;

use super::{degradation_ratio, iae, BisSignal, MetricsError};
use crate::control::{ControllerConfig, InductionSchedule};
use crate::patient::VirtualPatient;
use crate::sim::{ClosedLoopSim, DisturbanceProfile, ModelDemographics, NoiseModel, Scenario};
use crate::Scalar;

/// The maintenance-phase experiment each tf2 candidate is scored on.
///
/// Each patient is first brought to target by a noise-free closed-loop
/// warm-up. From that state the controller runs `window_min` minutes in
/// maintenance mode under `disturbance` (times relative to the window start)
/// and the IAE of `signal` is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct MaintenanceTemplate<T> {
    pub controller: ControllerConfig<T>,
    pub model_demographics: ModelDemographics<T>,
    pub h: T,
    pub warmup_min: T,
    pub window_min: T,
    pub disturbance: DisturbanceProfile<T>,
    pub signal: BisSignal,
}

impl<T: Scalar> Default for MaintenanceTemplate<T> {
    /// 60 min warm-up, then a 30 min window with a sustained +10 BIS step
    /// from minute 1, scored on the measured channel.
    fn default() -> Self {
        Self {
            controller: ControllerConfig::default(),
            model_demographics: ModelDemographics::Patient,
            h: T::lit(1.0 / 60.0),
            warmup_min: T::lit(60.0),
            window_min: T::lit(30.0),
            disturbance: DisturbanceProfile::single(T::one(), T::lit(30.0), T::lit(10.0)),
            signal: BisSignal::Measured,
        }
    }
}

impl<T: Scalar> MaintenanceTemplate<T> {
    /// Template sharing a scenario's controller, step and internal model.
    pub fn from_scenario(s: &Scenario<T>) -> Self {
        Self {
            controller: s.controller,
            model_demographics: s.model_demographics,
            h: s.h,
            ..Self::default()
        }
    }

    fn warm_up(&self, patient: &VirtualPatient<T>) -> Result<ClosedLoopSim<T>, MetricsError> {
        let mut scenario = Scenario::new(patient.clone());
        scenario.controller = self.controller;
        scenario.model_demographics = self.model_demographics;
        scenario.h = self.h;
        scenario.duration = self.warmup_min.max(self.h);
        let mut sim = ClosedLoopSim::new(&scenario)?;
        sim.run_for(self.warmup_min)?;
        let cfg = sim.controller_config_mut();
        cfg.induction = InductionSchedule::disabled();
        sim.set_noise(NoiseModel::default());
        let start = sim.time();
        sim.set_disturbance(self.disturbance.shifted(start));
        Ok(sim)
    }

    fn window_iae(&self, warmed: &ClosedLoopSim<T>, tf2: T) -> Result<T, MetricsError> {
        let mut sim = warmed.clone();
        sim.controller_config_mut().tf2 = tf2;
        let traj = sim.run_for(self.window_min)?;
        Ok(iae(&traj, self.controller.target_bis, self.signal))
    }
}

/// Degradation ratio curve over a tf2 grid and the selected time constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult<T> {
    pub grid: Vec<T>,
    pub d_values: Vec<T>,
    pub selected_tf2: T,
    pub threshold: T,
    /// Per-patient IAE with tf2 = 0, in cohort order.
    pub baseline_iae: Vec<T>,
}

/// Largest grid value whose ratio is at most `threshold`.
pub fn select_tf2<T: Scalar>(grid: &[T], d_values: &[T], threshold: T) -> Option<T> {
    grid.iter()
        .zip(d_values)
        .filter(|(_, d)| **d <= threshold)
        .map(|(g, _)| *g)
        .last()
}

/// Scores every tf2 in `grid` by the worst-case IAE degradation over
/// `cohort` relative to tf2 = 0 and picks the largest value whose ratio does
/// not exceed `threshold`.
pub fn tune_tf2<T: Scalar>(
    grid: &[T],
    threshold: T,
    cohort: &[VirtualPatient<T>],
    template: &MaintenanceTemplate<T>,
) -> Result<SweepResult<T>, MetricsError> {
    if grid.is_empty() || cohort.is_empty() {
        return Err(MetricsError::Empty);
    }
    if grid.iter().any(|g| !g.is_finite() || *g < T::zero()) {
        return Err(MetricsError::InvalidArgument("grid values must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MetricsError::InvalidArgument("grid must be strictly increasing"));
    }
    if threshold.is_nan() {
        return Err(MetricsError::InvalidArgument("threshold must not be NaN"));
    }

    let warmed: Vec<ClosedLoopSim<T>> = cohort
        .par_iter()
        .map(|p| template.warm_up(p))
        .collect::<Result<_, _>>()?;
    let baseline_iae: Vec<T> = warmed
        .par_iter()
        .map(|s| template.window_iae(s, T::zero()))
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..warmed.len()).map(move |p| (g, p)))
        .collect();
    let scores: Vec<T> = jobs
        .par_iter()
        .map(|&(g, p)| template.window_iae(&warmed[p], grid[g]))
        .collect::<Result<_, _>>()?;

    let n = warmed.len();
    let d_values: Vec<T> = scores
        .chunks(n)
        .map(|filtered| degradation_ratio(filtered, &baseline_iae))
        .collect::<Result<_, _>>()?;

    match select_tf2(grid, &d_values, threshold) {
        Some(selected_tf2) => Ok(SweepResult {
            grid: grid.to_vec(),
            d_values,
            selected_tf2,
            threshold,
            baseline_iae,
        }),
        None => Err(MetricsError::NoFeasibleTf2 {
            threshold: threshold.as_f64(),
            grid: grid.iter().map(|g| g.as_f64()).collect(),
            d_values: d_values.iter().map(|d| d.as_f64()).collect(),
        }),
    }
}
