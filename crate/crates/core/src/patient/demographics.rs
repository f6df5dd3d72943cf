use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "F")]
    Female,
}

impl Sex {
    pub fn code(self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
        }
    }
}

/// Covariates used by the PK parameter derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demographics<T> {
    pub age: u32,
    pub height_cm: T,
    pub weight_kg: T,
    pub sex: Sex,
}

impl<T: Scalar> Demographics<T> {
    /// Validates the covariates, including a positive lean body mass.
    pub fn new(age: u32, height_cm: T, weight_kg: T, sex: Sex) -> Result<Self, ModelError> {
        if age == 0 {
            return Err(ModelError::InvalidDemographics {
                field: "age",
                constraint: "must be > 0",
                value: 0.0,
            });
        }
        for (field, v) in [("height_cm", height_cm), ("weight_kg", weight_kg)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(ModelError::InvalidDemographics {
                    field,
                    constraint: "must be finite and > 0",
                    value: v.as_f64(),
                });
            }
        }
        let d = Self {
            age,
            height_cm,
            weight_kg,
            sex,
        };
        d.lean_body_mass()?;
        Ok(d)
    }

    pub fn lean_body_mass(&self) -> Result<T, ModelError> {
        lean_body_mass(self.sex, self.weight_kg, self.height_cm)
    }

    pub fn cast<U: Scalar>(&self) -> Demographics<U> {
        Demographics {
            age: self.age,
            height_cm: U::lit(self.height_cm.as_f64()),
            weight_kg: U::lit(self.weight_kg.as_f64()),
            sex: self.sex,
        }
    }
}

/// Sex-specific lean body mass in kg (James formula).
pub fn lean_body_mass<T: Scalar>(sex: Sex, weight_kg: T, height_cm: T) -> Result<T, ModelError> {
    let (a, b) = match sex {
        Sex::Male => (T::lit(1.1), T::lit(128.0)),
        Sex::Female => (T::lit(1.07), T::lit(148.0)),
    };
    let ratio = weight_kg / height_cm;
    let lbm = a * weight_kg - b * ratio * ratio;
    if lbm.is_finite() && lbm > T::zero() {
        Ok(lbm)
    } else {
        Err(ModelError::NonPhysicalLbm { value: lbm.as_f64() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lbm_reference_values() {
        assert_abs_diff_eq!(
            lean_body_mass(Sex::Female, 65.0, 169.0).unwrap(),
            47.6565,
            epsilon = 5e-5
        );
        assert_abs_diff_eq!(
            lean_body_mass(Sex::Male, 77.0, 177.0).unwrap(),
            60.47605,
            epsilon = 5e-5
        );
        assert_abs_diff_eq!(
            lean_body_mass(Sex::Female, 77.0, 177.0).unwrap(),
            54.38106,
            epsilon = 5e-5
        );
    }

    #[test]
    fn lbm_goes_non_physical_for_extreme_weight() {
        // 1.07 w = 148 w^2/h^2  <=>  w = 1.07 h^2 / 148
        let err = lean_body_mass(Sex::Female, 250.0, 150.0).unwrap_err();
        assert!(matches!(err, ModelError::NonPhysicalLbm { .. }));
        assert!(err.to_string().contains("non-physical LBM"));
    }

    #[test]
    fn rejects_degenerate_demographics() {
        assert!(Demographics::new(0, 170.0, 70.0, Sex::Male).is_err());
        assert!(Demographics::new(30, -170.0, 70.0, Sex::Male).is_err());
        assert!(Demographics::new(30, 170.0, 0.0, Sex::Male).is_err());
        assert!(Demographics::new(30, 170.0, f64::NAN, Sex::Male).is_err());
        assert!(Demographics::new(30, 150.0, 250.0, Sex::Female).is_err());
        assert!(Demographics::new(30, 170.0, 70.0, Sex::Male).is_ok());
    }
}
