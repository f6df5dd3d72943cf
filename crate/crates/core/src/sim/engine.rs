use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::profile::{noise_sample, DisturbanceProfile, InfusionProfile, NoiseModel};
use super::trajectory::{Record, Trajectory};
use super::{SimError, SimErrorKind};
use crate::control::{controller_step, ControllerConfig, ControllerState};
use crate::patient::{
    hill_bis, step_rk4, CohortRow, Demographics, PatientState, PkParams, VirtualPatient,
    AVERAGE_PATIENT_ID,
};
use crate::Scalar;

/// Demographics the controller's internal PK model is built from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ModelDemographics<T> {
    /// The simulated patient's own (measured) covariates.
    #[default]
    Patient,
    /// The cohort-average individual, for when covariates are unknown.
    Average,
    Explicit(Demographics<T>),
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub patient: VirtualPatient<T>,
    pub controller: ControllerConfig<T>,
    pub model_demographics: ModelDemographics<T>,
    /// Run length [min].
    pub duration: T,
    /// Integration and sampling step [min].
    pub h: T,
    pub noise: NoiseModel<T>,
    pub disturbance: DisturbanceProfile<T>,
    pub seed: u64,
}

impl<T: Scalar> Scenario<T> {
    /// Noise-free 60-minute run at a 1 s step with default controller settings.
    pub fn new(patient: VirtualPatient<T>) -> Self {
        Self {
            patient,
            controller: ControllerConfig::default(),
            model_demographics: ModelDemographics::Patient,
            duration: T::lit(60.0),
            h: T::lit(1.0 / 60.0),
            noise: NoiseModel::default(),
            disturbance: DisturbanceProfile::default(),
            seed: 0,
        }
    }

    /// Number of whole steps; a trailing partial step is dropped.
    pub fn steps(&self) -> usize {
        steps_for(self.duration, self.h)
    }

    pub fn validate(&self) -> Result<(), SimErrorKind> {
        let invalid = |field, constraint| Err(SimErrorKind::InvalidScenario { field, constraint });
        if !(self.duration.is_finite() && self.duration > T::zero()) {
            return invalid("duration_min", "must be finite and > 0");
        }
        if !(self.h.is_finite() && self.h > T::zero()) {
            return invalid("step_min", "must be finite and > 0");
        }
        if self.steps() == 0 {
            return invalid("step_min", "must not exceed duration_min");
        }
        if !(self.noise.sigma.is_finite() && self.noise.sigma >= T::zero()) {
            return invalid("noise.sigma", "must be finite and >= 0");
        }
        for p in &self.disturbance.pulses {
            if !(p.start.is_finite() && p.amplitude.is_finite() && p.duration.is_finite()) {
                return invalid("disturbance", "pulse fields must be finite");
            }
            if p.duration < T::zero() || p.start < T::zero() {
                return invalid("disturbance", "pulse start and duration must be >= 0");
            }
        }
        self.controller.validate()?;
        Ok(())
    }

    /// PK parameters of the controller's internal model.
    pub fn model_pk(&self) -> Result<PkParams<T>, SimErrorKind> {
        let demo = match self.model_demographics {
            ModelDemographics::Patient => self.patient.demographics,
            ModelDemographics::Average => {
                let row = CohortRow::lookup(AVERAGE_PATIENT_ID).expect("average row present");
                Demographics::new(row.age, T::lit(row.height_cm), T::lit(row.weight_kg), row.sex)?
            }
            ModelDemographics::Explicit(d) => d,
        };
        Ok(PkParams::derive(&demo, self.patient.preset)?)
    }
}

/// Whole steps in `duration`, tolerating rounding in `duration / h`.
fn steps_for<T: Scalar>(duration: T, h: T) -> usize {
    let x = duration / h;
    let n = (x + x.abs() * T::epsilon() * T::lit(8.0) + T::lit(1e-9)).floor();
    n.to_usize().unwrap_or(0)
}

fn clamp_bis<T: Scalar>(v: T) -> T {
    v.max(T::zero()).min(T::lit(100.0))
}

/// A closed-loop run that can be advanced one step at a time.
#[derive(Debug, Clone)]
pub struct ClosedLoopSim<T> {
    patient: VirtualPatient<T>,
    cfg: ControllerConfig<T>,
    model_pk: PkParams<T>,
    h: T,
    noise: NoiseModel<T>,
    disturbance: DisturbanceProfile<T>,
    rng: ChaCha8Rng,
    state: PatientState<T>,
    controller: ControllerState<T>,
    step: usize,
}

impl<T: Scalar> ClosedLoopSim<T> {
    pub fn new(scenario: &Scenario<T>) -> Result<Self, SimError> {
        scenario.validate().map_err(|k| SimError::at(0, k))?;
        let model_pk = scenario.model_pk().map_err(|k| SimError::at(0, k))?;
        // The awake baseline is what the monitor shows before any drug.
        let controller = ControllerState::new(&scenario.controller, scenario.patient.hill.e0)
            .map_err(|e| SimError::at(0, e))?;
        Ok(Self {
            patient: scenario.patient.clone(),
            cfg: scenario.controller,
            model_pk,
            h: scenario.h,
            noise: scenario.noise,
            disturbance: scenario.disturbance.clone(),
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            state: PatientState::zero(),
            controller,
            step: 0,
        })
    }

    /// Time of the next sample [min].
    pub fn time(&self) -> T {
        T::lit(self.step as f64) * self.h
    }

    pub fn patient_state(&self) -> &PatientState<T> {
        &self.state
    }

    pub fn controller_state(&self) -> &ControllerState<T> {
        &self.controller
    }

    pub fn controller_config_mut(&mut self) -> &mut ControllerConfig<T> {
        &mut self.cfg
    }

    pub fn set_disturbance(&mut self, disturbance: DisturbanceProfile<T>) {
        self.disturbance = disturbance;
    }

    pub fn set_noise(&mut self, noise: NoiseModel<T>) {
        self.noise = noise;
    }

    /// Measures, runs the controller, records, then advances the patient.
    pub fn step(&mut self) -> Result<Record<T>, SimError> {
        let k = self.step;
        let t = self.time();
        let bis_true = hill_bis(self.state.ce, &self.patient.hill);
        let offset = self.disturbance.at(t) + noise_sample(&self.noise, &mut self.rng);
        let bis_measured = clamp_bis(bis_true + offset);
        let out = controller_step(&mut self.controller, &self.cfg, &self.model_pk, bis_measured, self.h)
            .map_err(|e| SimError::at(k, e))?;
        let record = Record {
            t,
            bis_true,
            bis_measured,
            bis_filtered: Some(out.bis_filtered),
            u: out.u,
            c1: self.state.c1,
            c2: self.state.c2,
            c3: self.state.c3,
            ce_true: self.state.ce,
            ce_model: Some(out.ce_model),
            i_t: Some(out.innovation),
            ce_ref: Some(out.ce_ref),
        };
        self.state =
            step_rk4(&self.state, out.u, &self.patient.pk, self.h).map_err(|e| SimError::at(k, e))?;
        self.step += 1;
        Ok(record)
    }

    pub fn run_steps(&mut self, n: usize) -> Result<Trajectory<T>, SimError> {
        let mut records = Vec::with_capacity(n);
        for _ in 0..n {
            records.push(self.step()?);
        }
        Ok(Trajectory { records })
    }

    pub fn run_for(&mut self, minutes: T) -> Result<Trajectory<T>, SimError> {
        self.run_steps(steps_for(minutes, self.h))
    }
}

/// Runs a scenario from a drug-free patient to the end of its horizon.
pub fn run_closed_loop<T: Scalar>(scenario: &Scenario<T>) -> Result<Trajectory<T>, SimError> {
    let mut sim = ClosedLoopSim::new(scenario)?;
    sim.run_steps(scenario.steps())
}

/// Runs independent scenarios in parallel; results keep the input order.
pub fn run_many<T: Scalar>(scenarios: &[Scenario<T>]) -> Vec<Result<Trajectory<T>, SimError>> {
    scenarios.par_iter().map(run_closed_loop).collect()
}

/// Drives the patient with a prescribed infusion (no controller).
pub fn run_open_loop<T: Scalar>(
    patient: &VirtualPatient<T>,
    infusion: &InfusionProfile<T>,
    duration: T,
    h: T,
) -> Result<Trajectory<T>, SimError> {
    if !(h.is_finite() && h > T::zero()) {
        return Err(SimError::at(
            0,
            SimErrorKind::InvalidScenario {
                field: "step_min",
                constraint: "must be finite and > 0",
            },
        ));
    }
    let n = if duration.is_finite() { steps_for(duration, h) } else { 0 };
    if n == 0 {
        return Err(SimError::at(
            0,
            SimErrorKind::InvalidScenario {
                field: "duration_min",
                constraint: "must cover at least one step",
            },
        ));
    }
    let mut state = PatientState::zero();
    let mut records = Vec::with_capacity(n);
    for k in 0..n {
        let t = T::lit(k as f64) * h;
        let u = infusion.rate_at(t);
        let bis_true = hill_bis(state.ce, &patient.hill);
        records.push(Record {
            t,
            bis_true,
            bis_measured: clamp_bis(bis_true),
            bis_filtered: None,
            u,
            c1: state.c1,
            c2: state.c2,
            c3: state.c3,
            ce_true: state.ce,
            ce_model: None,
            i_t: None,
            ce_ref: None,
        });
        state = step_rk4(&state, u, &patient.pk, h).map_err(|e| SimError::at(k, e))?;
    }
    Ok(Trajectory { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patient::PkPreset;

    fn p13() -> VirtualPatient<f64> {
        VirtualPatient::builtin(13, PkPreset::SchniderCorrected).unwrap()
    }

    #[test]
    fn single_step_run() {
        let mut s = Scenario::new(p13());
        s.duration = s.h;
        let traj = run_closed_loop(&s).unwrap();
        assert_eq!(traj.len(), 1);
        let r = traj.records[0];
        assert_eq!(r.bis_true, 93.1);
        assert_eq!(r.t, 0.0);
        assert!(r.u > 0.0);
    }

    #[test]
    fn partial_step_truncated() {
        let mut s = Scenario::new(p13());
        s.duration = 1.0;
        s.h = 0.3;
        assert_eq!(s.steps(), 3);
        s.h = 1.0 / 60.0;
        s.duration = 60.0;
        assert_eq!(s.steps(), 3600);
    }

    #[test]
    fn invalid_scenarios() {
        let mut s = Scenario::new(p13());
        s.h = 0.0;
        assert_eq!(run_closed_loop(&s).unwrap_err().step, 0);
        let mut s = Scenario::new(p13());
        s.duration = 0.001;
        assert!(run_closed_loop(&s).is_err());
        let mut s = Scenario::new(p13());
        s.noise.sigma = -1.0;
        assert!(run_closed_loop(&s).is_err());
    }

    #[test]
    fn controller_error_carries_step() {
        // A huge negative disturbance pushes the measurement below the
        // nominal curve's floor and the inverse Hill fails.
        let mut s = Scenario::new(p13());
        s.controller.tf1 = 0.0;
        s.disturbance = DisturbanceProfile::single(1.0, 1.0, -100.0);
        let err = run_closed_loop(&s).unwrap_err();
        assert_eq!(err.step, 60);
        assert!(matches!(err.kind, SimErrorKind::Control(_)));
    }

    #[test]
    fn zero_infusion_open_loop() {
        let p = p13();
        let traj = run_open_loop(&p, &InfusionProfile::constant(0.0), 10.0, 1.0 / 60.0).unwrap();
        assert_eq!(traj.len(), 600);
        for r in &traj.records {
            assert_eq!(r.bis_true, 93.1);
            assert_eq!([r.c1, r.c2, r.c3, r.ce_true], [0.0; 4]);
            assert!(r.bis_filtered.is_none() && r.ce_ref.is_none());
        }
    }
}
