use super::{inverse_hill, ControlError, Lp2, NominalHill, PopulationHill};
use crate::patient::{step_rk4, PatientState, PkParams};
use crate::Scalar;

/// Aggressive settings used during the first minutes of a run.
///
/// Once `duration_min` has elapsed the controller switches to the
/// maintenance gains and F2 time constant of [`ControllerConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductionSchedule<T> {
    pub duration_min: T,
    pub kp: T,
    pub ki: T,
    pub tf2: T,
}

impl<T: Scalar> Default for InductionSchedule<T> {
    fn default() -> Self {
        Self {
            duration_min: T::lit(20.0),
            kp: T::lit(30.0),
            ki: T::lit(3.0),
            tf2: T::lit(0.5),
        }
    }
}

impl<T: Scalar> InductionSchedule<T> {
    /// A schedule that is never active.
    pub fn disabled() -> Self {
        Self {
            duration_min: T::zero(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig<T> {
    /// BIS set point.
    pub target_bis: T,
    /// F1 (BIS pre-filter) time constant [min].
    pub tf1: T,
    /// F2 (innovation filter) time constant during maintenance [min].
    pub tf2: T,
    /// Maintenance proportional gain [L/min].
    pub kp: T,
    /// Maintenance integral gain [L/min^2].
    pub ki: T,
    /// Pump limit [mg/min].
    pub u_max: T,
    pub population: PopulationHill<T>,
    pub induction: InductionSchedule<T>,
}

impl<T: Scalar> Default for ControllerConfig<T> {
    fn default() -> Self {
        Self {
            target_bis: T::lit(50.0),
            tf1: T::lit(0.1),
            tf2: T::lit(9.7871),
            kp: T::lit(5.0),
            ki: T::lit(5.0),
            u_max: T::lit(200.0),
            population: PopulationHill::default(),
            induction: InductionSchedule::default(),
        }
    }
}

impl<T: Scalar> ControllerConfig<T> {
    /// Checks the static constraints; `target_bis < e0` is checked against
    /// the measured baseline in [`ControllerState::new`].
    pub fn validate(&self) -> Result<(), ControlError> {
        let z = T::zero();
        let checks = [
            ("target_bis", self.target_bis, self.target_bis > z, "must be > 0"),
            ("tf1", self.tf1, self.tf1 >= z, "must be >= 0"),
            ("tf2", self.tf2, self.tf2 >= z, "must be >= 0"),
            ("kp", self.kp, self.kp >= z, "must be >= 0"),
            ("ki", self.ki, self.ki >= z, "must be >= 0"),
            ("u_max", self.u_max, self.u_max > z, "must be > 0"),
            ("population.emax", self.population.emax, self.population.emax > z, "must be > 0"),
            ("population.gamma", self.population.gamma, self.population.gamma > z, "must be > 0"),
            ("population.ce50", self.population.ce50, self.population.ce50 > z, "must be > 0"),
            (
                "induction.duration_min",
                self.induction.duration_min,
                self.induction.duration_min >= z,
                "must be >= 0",
            ),
            ("induction.kp", self.induction.kp, self.induction.kp >= z, "must be >= 0"),
            ("induction.ki", self.induction.ki, self.induction.ki >= z, "must be >= 0"),
            ("induction.tf2", self.induction.tf2, self.induction.tf2 >= z, "must be >= 0"),
        ];
        for (field, value, ok, constraint) in checks {
            if !(value.is_finite() && ok) {
                return Err(ControlError::InvalidConfig {
                    field,
                    constraint,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ControllerConfig<U> {
        let c = |v: T| U::lit(v.as_f64());
        ControllerConfig {
            target_bis: c(self.target_bis),
            tf1: c(self.tf1),
            tf2: c(self.tf2),
            kp: c(self.kp),
            ki: c(self.ki),
            u_max: c(self.u_max),
            population: PopulationHill {
                emax: c(self.population.emax),
                gamma: c(self.population.gamma),
                ce50: c(self.population.ce50),
            },
            induction: InductionSchedule {
                duration_min: c(self.induction.duration_min),
                kp: c(self.induction.kp),
                ki: c(self.induction.ki),
                tf2: c(self.induction.tf2),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Induction,
    Maintenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    None,
    Low,
    High,
}

/// Clamps `u_raw` into `[0, u_max]` and reports which limit was hit.
pub fn saturate<T: Scalar>(u_raw: T, u_max: T) -> (T, Saturation) {
    if u_raw < T::zero() {
        (T::zero(), Saturation::Low)
    } else if u_raw > u_max {
        (u_max, Saturation::High)
    } else {
        (u_raw, Saturation::None)
    }
}

/// Everything the controller carries between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState<T> {
    pub f1: Lp2<T>,
    pub f2: Lp2<T>,
    /// Internal copy of the patient model, driven by the applied infusion.
    pub model_state: PatientState<T>,
    /// Accumulated integral action [mg/min].
    pub integrator: T,
    pub last_u: T,
    /// Minutes since the controller was started.
    pub elapsed: T,
    pub nominal: NominalHill<T>,
}

impl<T: Scalar> ControllerState<T> {
    /// Fresh controller for a drug-free patient whose awake BIS is `measured_e0`.
    pub fn new(cfg: &ControllerConfig<T>, measured_e0: T) -> Result<Self, ControlError> {
        cfg.validate()?;
        if !(measured_e0.is_finite() && cfg.target_bis < measured_e0) {
            return Err(ControlError::InvalidConfig {
                field: "target_bis",
                constraint: "must be below the measured baseline e0",
                value: cfg.target_bis.as_f64(),
            });
        }
        let initial_tf2 = if cfg.induction.duration_min > T::zero() {
            cfg.induction.tf2
        } else {
            cfg.tf2
        };
        Ok(Self {
            f1: Lp2::at_rest(cfg.tf1, measured_e0),
            f2: Lp2::new(initial_tf2),
            model_state: PatientState::zero(),
            integrator: T::zero(),
            last_u: T::zero(),
            elapsed: T::zero(),
            nominal: cfg.population.with_e0(measured_e0),
        })
    }

    pub fn phase(&self, cfg: &ControllerConfig<T>) -> Phase {
        // The tolerance keeps the switch on the same sample regardless of
        // how `elapsed` accumulated round-off.
        if self.elapsed + T::lit(1e-9) < cfg.induction.duration_min {
            Phase::Induction
        } else {
            Phase::Maintenance
        }
    }
}

/// Signals produced by one controller sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput<T> {
    pub u: T,
    pub u_raw: T,
    pub saturation: Saturation,
    pub phase: Phase,
    pub bis_filtered: T,
    pub ce_measured: T,
    /// Innovation i(t): filtered gap between measured and modelled ce.
    pub innovation: T,
    pub ce_ref: T,
    /// Internal model ce used for this sample (before the model advanced).
    pub ce_model: T,
}

/// Runs one sample of the controller and advances its internal model.
pub fn controller_step<T: Scalar>(
    cs: &mut ControllerState<T>,
    cfg: &ControllerConfig<T>,
    pk_nominal: &PkParams<T>,
    measured_bis: T,
    h: T,
) -> Result<ControlOutput<T>, ControlError> {
    if !measured_bis.is_finite() || !(h > T::zero()) {
        return Err(ControlError::Diverged);
    }
    let phase = cs.phase(cfg);
    let (kp, ki, tf2) = match phase {
        Phase::Induction => (cfg.induction.kp, cfg.induction.ki, cfg.induction.tf2),
        Phase::Maintenance => (cfg.kp, cfg.ki, cfg.tf2),
    };

    cs.f1.tf = cfg.tf1;
    let bis_filtered = cs.f1.step(measured_bis, h);
    let ce_measured = inverse_hill(bis_filtered, &cs.nominal)?;

    let ce_model = cs.model_state.ce;
    cs.f2.tf = tf2;
    let innovation = cs.f2.step(ce_measured - ce_model, h);

    let ce_ref = inverse_hill(cfg.target_bis, &cs.nominal)?;
    let error = ce_ref - (ce_model + innovation);

    let candidate = cs.integrator + ki * error * h;
    let u_raw = kp * error + candidate;
    let (u, saturation) = saturate(u_raw, cfg.u_max);
    // Conditional integration: freeze while pushing further into a limit.
    let winding = match saturation {
        Saturation::High => error > T::zero(),
        Saturation::Low => error < T::zero(),
        Saturation::None => false,
    };
    if !winding {
        cs.integrator = candidate;
    }

    if !(u_raw.is_finite() && cs.integrator.is_finite() && innovation.is_finite()) {
        return Err(ControlError::Diverged);
    }

    cs.model_state = step_rk4(&cs.model_state, u, pk_nominal, h)?;
    cs.last_u = u;
    cs.elapsed = cs.elapsed + h;

    Ok(ControlOutput {
        u,
        u_raw,
        saturation,
        phase,
        bis_filtered,
        ce_measured,
        innovation,
        ce_ref,
        ce_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patient::{Demographics, PkPreset, Sex};

    fn pk13() -> PkParams<f64> {
        let d = Demographics::new(38, 169.0, 65.0, Sex::Female).unwrap();
        PkParams::derive(&d, PkPreset::SchniderCorrected).unwrap()
    }

    #[test]
    fn saturation_cases() {
        assert_eq!(saturate(-5.0, 200.0), (0.0, Saturation::Low));
        assert_eq!(saturate(50.0, 200.0), (50.0, Saturation::None));
        assert_eq!(saturate(350.0, 200.0), (200.0, Saturation::High));
    }

    #[test]
    fn induction_starts_on_target_measurement() {
        let cfg = ControllerConfig::default();
        let pk = pk13();
        let mut cs = ControllerState::new(&cfg, 93.1).unwrap();
        let h = 1.0 / 60.0;
        let out = controller_step(&mut cs, &cfg, &pk, 50.0, h).unwrap();
        assert_eq!(out.phase, Phase::Induction);
        let ce_ref = inverse_hill(50.0, &cs.nominal).unwrap();
        // F1 starts at e0 so one sample barely moves it; ce_measured is tiny.
        let d = ce_ref - out.innovation;
        let expected = cfg.induction.kp * d + cfg.induction.ki * d * h;
        assert!(out.u > 0.0);
        assert!((out.u - expected).abs() < 1e-12, "u={} expected={expected}", out.u);
    }

    #[test]
    fn closed_loop_fixed_point() {
        let cfg = ControllerConfig {
            induction: InductionSchedule::disabled(),
            ..ControllerConfig::default()
        };
        let pk = pk13();
        let h = 1.0 / 60.0;
        let mut cs = ControllerState::new(&cfg, 93.1).unwrap();
        let u_ss = 13.0;
        let ce_ref = inverse_hill(cfg.target_bis, &cs.nominal).unwrap();
        cs.model_state = PatientState::equilibrium(&pk, u_ss);
        let offset = ce_ref - cs.model_state.ce;
        cs.f1 = Lp2::at_rest(cfg.tf1, cfg.target_bis);
        cs.f2 = Lp2::at_rest(cfg.tf2, offset);
        cs.integrator = u_ss;
        for _ in 0..600 {
            let out = controller_step(&mut cs, &cfg, &pk, cfg.target_bis, h).unwrap();
            assert!((out.u - u_ss).abs() < 1e-9, "u={}", out.u);
        }
        assert!((cs.model_state.ce - u_ss / pk.cl1).abs() < 1e-9);
    }

    #[test]
    fn anti_windup_freezes_integrator_at_upper_limit() {
        let cfg = ControllerConfig {
            u_max: 10.0,
            ..ControllerConfig::default()
        };
        let pk = pk13();
        let mut cs = ControllerState::new(&cfg, 93.1).unwrap();
        let h = 1.0 / 60.0;
        for _ in 0..120 {
            let out = controller_step(&mut cs, &cfg, &pk, 93.1, h).unwrap();
            assert_eq!(out.saturation, Saturation::High);
            assert_eq!(out.u, 10.0);
            assert_eq!(cs.integrator, 0.0);
        }
    }

    #[test]
    fn switches_to_maintenance() {
        let cfg = ControllerConfig::default();
        let pk = pk13();
        let h = 1.0 / 60.0;
        let mut cs = ControllerState::new(&cfg, 93.1).unwrap();
        let mut switched_at = None;
        for k in 0..1300 {
            let out = controller_step(&mut cs, &cfg, &pk, 60.0, h).unwrap();
            if out.phase == Phase::Maintenance && switched_at.is_none() {
                switched_at = Some(k);
            }
        }
        assert_eq!(switched_at, Some(1200));
        assert_eq!(cs.f2.tf, cfg.tf2);
    }

    #[test]
    fn bad_inputs() {
        let cfg = ControllerConfig::default();
        let pk = pk13();
        let mut cs = ControllerState::new(&cfg, 93.1).unwrap();
        assert_eq!(
            controller_step(&mut cs, &cfg, &pk, f64::NAN, 0.1).unwrap_err(),
            ControlError::Diverged
        );
        assert!(matches!(
            controller_step(&mut cs, &cfg, &pk, 2.0, 10.0).unwrap_err(),
            ControlError::InverseHillDomain { .. }
        ));
        assert!(ControllerState::new(&cfg, 45.0).is_err());
        let bad = ControllerConfig { u_max: 0.0, ..cfg };
        assert!(matches!(
            ControllerState::new(&bad, 93.1).unwrap_err(),
            ControlError::InvalidConfig { field: "u_max", .. }
        ));
    }
}
