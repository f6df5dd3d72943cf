use serde::{Deserialize, Serialize};

use super::ParseError;
use crate::control::{ControllerConfig, InductionSchedule, PopulationHill};
use crate::patient::{
    CohortRow, Demographics, HillParams, ModelError, PkPreset, Sex, VirtualPatient,
    AVERAGE_PATIENT_ID,
};
use crate::sim::{DisturbanceProfile, ModelDemographics, NoiseKind, NoiseModel, Pulse, Scenario};

/// On-disk scenario. Absent keys take defaults; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patient: Option<PatientFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pk_preset: Option<PkPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_demographics: Option<ModelDemographicsFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<Vec<PulseFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientFile {
    #[serde(default)]
    pub id: u32,
    pub age: u32,
    pub height_cm: f64,
    pub weight_kg: f64,
    pub sex: Sex,
    pub ce50: f64,
    pub gamma: f64,
    pub e0: f64,
    pub emax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemographicsFile {
    pub age: u32,
    pub height_cm: f64,
    pub weight_kg: f64,
    pub sex: Sex,
}

/// `"patient"`, `"average"` or explicit covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelDemographicsFile {
    Named(String),
    Explicit(DemographicsFile),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<NoiseKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseFile {
    pub start_min: f64,
    pub duration_min: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_bis: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf1_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf2_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ki: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal: Option<PopulationFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induction: Option<InductionFile>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ce50: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ki: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf2_min: Option<f64>,
}

type Check = fn(f64) -> bool;

const POSITIVE: (Check, &str) = (|v| v > 0.0, "must be finite and > 0");
const NON_NEGATIVE: (Check, &str) = (|v| v >= 0.0, "must be finite and >= 0");

fn value(key: &str, v: Option<f64>, default: f64, (ok, constraint): (Check, &str)) -> Result<f64, ParseError> {
    let v = v.unwrap_or(default);
    if v.is_finite() && ok(v) {
        Ok(v)
    } else {
        Err(ParseError::invalid(key, format!("{constraint} (got {v})")))
    }
}

fn model_err(key: &str, e: ModelError) -> ParseError {
    match e {
        ModelError::UnknownPatient(id) => ParseError::UnknownPatient(id),
        e @ (ModelError::NonPhysicalPk { .. } | ModelError::NonPhysicalLbm { .. }) => ParseError::Model(e),
        other => ParseError::invalid(key, other.to_string()),
    }
}

fn classify(e: serde_json::Error) -> ParseError {
    let msg = e.to_string();
    if msg.contains("unknown field") {
        ParseError::UnknownKey(msg)
    } else {
        ParseError::Syntax(msg)
    }
}

fn demographics(key: &str, d: &DemographicsFile) -> Result<Demographics<f64>, ParseError> {
    Demographics::new(d.age, d.height_cm, d.weight_kg, d.sex).map_err(|e| model_err(key, e))
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario<f64>, ParseError> {
        let preset = self.pk_preset.unwrap_or_default();
        let patient = match (self.patient_id, &self.patient) {
            (Some(_), Some(_)) => {
                return Err(ParseError::invalid("patient", "give either `patient_id` or `patient`, not both"))
            }
            (_, Some(p)) => {
                let demo = demographics("patient", &DemographicsFile {
                    age: p.age,
                    height_cm: p.height_cm,
                    weight_kg: p.weight_kg,
                    sex: p.sex,
                })?;
                let hill = HillParams::new(p.e0, p.emax, p.ce50, p.gamma).map_err(|e| model_err("patient", e))?;
                VirtualPatient::new(p.id, demo, hill, preset).map_err(|e| model_err("patient", e))?
            }
            (id, None) => VirtualPatient::builtin(id.unwrap_or(AVERAGE_PATIENT_ID), preset)
                .map_err(|e| model_err("patient_id", e))?,
        };

        let mut scenario = Scenario::new(patient);
        scenario.duration = value("duration_min", self.duration_min, 60.0, POSITIVE)?;
        scenario.h = value("step_min", self.step_min, 1.0 / 60.0, POSITIVE)?;
        if scenario.steps() == 0 {
            return Err(ParseError::invalid("step_min", "must not exceed duration_min"));
        }
        scenario.seed = self.seed.unwrap_or(0);

        scenario.model_demographics = match &self.model_demographics {
            None => ModelDemographics::Patient,
            Some(ModelDemographicsFile::Named(n)) if n == "patient" => ModelDemographics::Patient,
            Some(ModelDemographicsFile::Named(n)) if n == "average" => ModelDemographics::Average,
            Some(ModelDemographicsFile::Named(n)) => {
                return Err(ParseError::invalid(
                    "model_demographics",
                    format!("expected \"patient\", \"average\" or an object (got \"{n}\")"),
                ))
            }
            Some(ModelDemographicsFile::Explicit(d)) => {
                ModelDemographics::Explicit(demographics("model_demographics", d)?)
            }
        };

        let noise = self.noise.unwrap_or_default();
        scenario.noise = NoiseModel {
            kind: noise.kind.unwrap_or_default(),
            sigma: value("noise.sigma", noise.sigma, 2.0, NON_NEGATIVE)?,
        };

        let mut pulses = Vec::new();
        for (i, p) in self.disturbance.unwrap_or_default().iter().enumerate() {
            pulses.push(Pulse {
                start: value(&format!("disturbance[{i}].start_min"), Some(p.start_min), 0.0, NON_NEGATIVE)?,
                duration: value(&format!("disturbance[{i}].duration_min"), Some(p.duration_min), 0.0, NON_NEGATIVE)?,
                amplitude: value(&format!("disturbance[{i}].amplitude"), Some(p.amplitude), 0.0, (|_| true, "must be finite"))?,
            });
        }
        scenario.disturbance = DisturbanceProfile::new(pulses);

        scenario.controller = controller_config(self.controller.unwrap_or_default())?;
        if scenario.controller.target_bis >= scenario.patient.hill.e0 {
            return Err(ParseError::invalid(
                "controller.target_bis",
                format!("must be below the patient's baseline e0 = {}", scenario.patient.hill.e0),
            ));
        }
        scenario
            .validate()
            .map_err(|e| ParseError::invalid("scenario", e.to_string()))?;
        Ok(scenario)
    }

    /// Fully explicit file describing `s`.
    pub fn from_scenario(s: &Scenario<f64>) -> Self {
        let p = &s.patient;
        let builtin = CohortRow::lookup(p.id)
            .and_then(|row| VirtualPatient::<f64>::from_row(row, p.preset).ok())
            .is_some_and(|b| b.demographics == p.demographics && b.hill == p.hill);
        let (patient_id, patient) = if builtin {
            (Some(p.id), None)
        } else {
            let d = &p.demographics;
            (
                None,
                Some(PatientFile {
                    id: p.id,
                    age: d.age,
                    height_cm: d.height_cm,
                    weight_kg: d.weight_kg,
                    sex: d.sex,
                    ce50: p.hill.ce50,
                    gamma: p.hill.gamma,
                    e0: p.hill.e0,
                    emax: p.hill.emax,
                }),
            )
        };
        let model_demographics = match s.model_demographics {
            ModelDemographics::Patient => ModelDemographicsFile::Named("patient".into()),
            ModelDemographics::Average => ModelDemographicsFile::Named("average".into()),
            ModelDemographics::Explicit(d) => ModelDemographicsFile::Explicit(DemographicsFile {
                age: d.age,
                height_cm: d.height_cm,
                weight_kg: d.weight_kg,
                sex: d.sex,
            }),
        };
        let c = &s.controller;
        Self {
            patient_id,
            patient,
            pk_preset: Some(p.preset),
            duration_min: Some(s.duration),
            step_min: Some(s.h),
            seed: Some(s.seed),
            model_demographics: Some(model_demographics),
            noise: Some(NoiseFile {
                kind: Some(s.noise.kind),
                sigma: Some(s.noise.sigma),
            }),
            disturbance: Some(
                s.disturbance
                    .pulses
                    .iter()
                    .map(|p| PulseFile {
                        start_min: p.start,
                        duration_min: p.duration,
                        amplitude: p.amplitude,
                    })
                    .collect(),
            ),
            controller: Some(ControllerFile {
                target_bis: Some(c.target_bis),
                tf1_min: Some(c.tf1),
                tf2_min: Some(c.tf2),
                kp: Some(c.kp),
                ki: Some(c.ki),
                u_max: Some(c.u_max),
                nominal: Some(PopulationFile {
                    emax: Some(c.population.emax),
                    gamma: Some(c.population.gamma),
                    ce50: Some(c.population.ce50),
                }),
                induction: Some(InductionFile {
                    duration_min: Some(c.induction.duration_min),
                    kp: Some(c.induction.kp),
                    ki: Some(c.induction.ki),
                    tf2_min: Some(c.induction.tf2),
                }),
            }),
        }
    }
}

fn controller_config(f: ControllerFile) -> Result<ControllerConfig<f64>, ParseError> {
    let d = ControllerConfig::<f64>::default();
    let pop = f.nominal.unwrap_or_default();
    let ind = f.induction.unwrap_or_default();
    Ok(ControllerConfig {
        target_bis: value("controller.target_bis", f.target_bis, d.target_bis, POSITIVE)?,
        tf1: value("controller.tf1_min", f.tf1_min, d.tf1, NON_NEGATIVE)?,
        tf2: value("controller.tf2_min", f.tf2_min, d.tf2, NON_NEGATIVE)?,
        kp: value("controller.kp", f.kp, d.kp, NON_NEGATIVE)?,
        ki: value("controller.ki", f.ki, d.ki, NON_NEGATIVE)?,
        u_max: value("controller.u_max", f.u_max, d.u_max, POSITIVE)?,
        population: PopulationHill {
            emax: value("controller.nominal.emax", pop.emax, d.population.emax, POSITIVE)?,
            gamma: value("controller.nominal.gamma", pop.gamma, d.population.gamma, POSITIVE)?,
            ce50: value("controller.nominal.ce50", pop.ce50, d.population.ce50, POSITIVE)?,
        },
        induction: InductionSchedule {
            duration_min: value(
                "controller.induction.duration_min",
                ind.duration_min,
                d.induction.duration_min,
                NON_NEGATIVE,
            )?,
            kp: value("controller.induction.kp", ind.kp, d.induction.kp, NON_NEGATIVE)?,
            ki: value("controller.induction.ki", ind.ki, d.induction.ki, NON_NEGATIVE)?,
            tf2: value("controller.induction.tf2_min", ind.tf2_min, d.induction.tf2, NON_NEGATIVE)?,
        },
    })
}

/// Parses and validates a JSON scenario, filling defaults for absent keys.
pub fn parse_scenario(text: &str) -> Result<Scenario<f64>, ParseError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(classify)?;
    file.into_scenario()
}

/// Serializes `s` as a fully explicit scenario file.
pub fn scenario_to_json(s: &Scenario<f64>) -> String {
    serde_json::to_string_pretty(&ScenarioFile::from_scenario(s)).expect("plain data serializes")
}
