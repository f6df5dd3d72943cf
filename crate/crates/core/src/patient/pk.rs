use serde::{Deserialize, Serialize};

use super::{Demographics, ModelError};
use crate::Scalar;

/// Effect-site equilibration rate, used for both k1e and ke0 [1/min].
pub const KE0_DEFAULT: f64 = 0.456;

/// Coefficient set used to derive PK parameters from demographics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PkPreset {
    /// Standard Schnider coefficients: 0.0456 (weight), 0.0264 (height), V3 = 238 L.
    #[default]
    SchniderCorrected,
    /// Coefficients exactly as commonly misprinted: 0.456, 0.264 and V3 = 2.38 L.
    /// Produces negative clearance for most adults and is kept for auditing.
    Uncorrected,
}

/// Compartment volumes [L], rate constants [1/min] and clearances [L/min].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PkParams<T> {
    pub v1: T,
    pub v2: T,
    pub v3: T,
    pub k10: T,
    pub k12: T,
    pub k13: T,
    pub k21: T,
    pub k31: T,
    pub k1e: T,
    pub ke0: T,
    pub cl1: T,
    pub cl2: T,
    pub cl3: T,
}

impl<T: Scalar> PkParams<T> {
    /// Builds the rate constants from volumes and clearances.
    ///
    /// Volumes and `cl1` must be strictly positive; the inter-compartment
    /// clearances may be zero (which decouples that compartment).
    pub fn from_clearances(
        v1: T,
        v2: T,
        v3: T,
        cl1: T,
        cl2: T,
        cl3: T,
        ke0: T,
    ) -> Result<Self, ModelError> {
        let positive = [("v1", v1), ("v2", v2), ("v3", v3), ("cl1", cl1)];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(ModelError::NonPhysicalPk {
                    name,
                    value: v.as_f64(),
                });
            }
        }
        for (name, v) in [("cl2", cl2), ("cl3", cl3), ("ke0", ke0)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(ModelError::NonPhysicalPk {
                    name,
                    value: v.as_f64(),
                });
            }
        }
        Ok(Self {
            v1,
            v2,
            v3,
            k10: cl1 / v1,
            k12: cl2 / v1,
            k13: cl3 / v1,
            k21: cl2 / v2,
            k31: cl3 / v3,
            k1e: ke0,
            ke0,
            cl1,
            cl2,
            cl3,
        })
    }

    /// Derives the patient's PK parameters from demographics.
    pub fn derive(demo: &Demographics<T>, preset: PkPreset) -> Result<Self, ModelError> {
        let lit = T::lit;
        let age = lit(demo.age as f64);
        let lbm = demo.lean_body_mass()?;
        let (w_coef, h_coef, v3) = match preset {
            PkPreset::SchniderCorrected => (lit(0.0456), lit(0.0264), lit(238.0)),
            PkPreset::Uncorrected => (lit(0.456), lit(0.264), lit(2.38)),
        };
        let v1 = lit(4.27);
        let v2 = lit(18.9) - lit(0.391) * (age - lit(53.0));
        let cl1 = lit(1.89) + w_coef * (demo.weight_kg - lit(77.0))
            - lit(0.0681) * (lbm - lit(59.0))
            + h_coef * (demo.height_cm - lit(177.0));
        let cl2 = lit(1.29) - lit(0.024) * (age - lit(53.0));
        let cl3 = lit(0.836);
        if !(cl1 > T::zero()) {
            return Err(ModelError::NonPhysicalPk {
                name: "cl1",
                value: cl1.as_f64(),
            });
        }
        if !(v2 > T::zero()) {
            return Err(ModelError::NonPhysicalPk {
                name: "v2",
                value: v2.as_f64(),
            });
        }
        Self::from_clearances(v1, v2, v3, cl1, cl2, cl3, lit(KE0_DEFAULT))
    }

    pub fn cast<U: Scalar>(&self) -> PkParams<U> {
        let c = |v: T| U::lit(v.as_f64());
        PkParams {
            v1: c(self.v1),
            v2: c(self.v2),
            v3: c(self.v3),
            k10: c(self.k10),
            k12: c(self.k12),
            k13: c(self.k13),
            k21: c(self.k21),
            k31: c(self.k31),
            k1e: c(self.k1e),
            ke0: c(self.ke0),
            cl1: c(self.cl1),
            cl2: c(self.cl2),
            cl3: c(self.cl3),
        }
    }
}

/// Plasma, shallow, deep and effect-site concentrations [mg/L].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PatientState<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub ce: T,
}

impl<T: Scalar> PatientState<T> {
    pub fn zero() -> Self {
        Self {
            c1: T::zero(),
            c2: T::zero(),
            c3: T::zero(),
            ce: T::zero(),
        }
    }

    /// Steady state reached under a constant infusion `u` [mg/min].
    pub fn equilibrium(pk: &PkParams<T>, u: T) -> Self {
        let c1 = u / pk.cl1;
        let c2 = if pk.k21 > T::zero() { c1 * pk.k12 / pk.k21 } else { T::zero() };
        let c3 = if pk.k31 > T::zero() { c1 * pk.k13 / pk.k31 } else { T::zero() };
        let ce = if pk.ke0 > T::zero() { c1 * pk.k1e / pk.ke0 } else { T::zero() };
        Self { c1, c2, c3, ce }
    }

    fn axpy(&self, a: T, d: &Self) -> Self {
        Self {
            c1: self.c1 + a * d.c1,
            c2: self.c2 + a * d.c2,
            c3: self.c3 + a * d.c3,
            ce: self.ce + a * d.ce,
        }
    }

    pub fn components(&self) -> [T; 4] {
        [self.c1, self.c2, self.c3, self.ce]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|v| v.is_finite())
    }
}

/// Right-hand side of the PK/effect-site ODE for infusion rate `u` [mg/min].
pub fn pk_derivatives<T: Scalar>(state: &PatientState<T>, u: T, pk: &PkParams<T>) -> PatientState<T> {
    let PatientState { c1, c2, c3, ce } = *state;
    PatientState {
        c1: -(pk.k10 + pk.k12 + pk.k13) * c1 + pk.k21 * c2 + pk.k31 * c3 + u / pk.v1,
        c2: pk.k12 * c1 - pk.k21 * c2,
        c3: pk.k13 * c1 - pk.k31 * c3,
        ce: pk.k1e * c1 - pk.ke0 * ce,
    }
}

/// One classical RK4 step of length `h` [min] with `u` held constant.
///
/// Negative components produced by round-off are clamped to zero.
pub fn step_rk4<T: Scalar>(
    state: &PatientState<T>,
    u: T,
    pk: &PkParams<T>,
    h: T,
) -> Result<PatientState<T>, ModelError> {
    let half = h / T::lit(2.0);
    let k1 = pk_derivatives(state, u, pk);
    let k2 = pk_derivatives(&state.axpy(half, &k1), u, pk);
    let k3 = pk_derivatives(&state.axpy(half, &k2), u, pk);
    let k4 = pk_derivatives(&state.axpy(h, &k3), u, pk);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let comb = |a: T, b: T, c: T, d: T| a + two * b + two * c + d;
    let next = PatientState {
        c1: state.c1 + sixth * comb(k1.c1, k2.c1, k3.c1, k4.c1),
        c2: state.c2 + sixth * comb(k1.c2, k2.c2, k3.c2, k4.c2),
        c3: state.c3 + sixth * comb(k1.c3, k2.c3, k3.c3, k4.c3),
        ce: state.ce + sixth * comb(k1.ce, k2.ce, k3.ce, k4.ce),
    };
    if !next.is_finite() {
        return Err(ModelError::IntegrationDiverged);
    }
    let clamp = |v: T| if v < T::zero() { T::zero() } else { v };
    Ok(PatientState {
        c1: clamp(next.c1),
        c2: clamp(next.c2),
        c3: clamp(next.c3),
        ce: clamp(next.ce),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patient::Sex;
    use approx::assert_relative_eq;

    fn patient13() -> Demographics<f64> {
        Demographics::new(38, 169.0, 65.0, Sex::Female).unwrap()
    }

    #[test]
    fn corrected_preset_patient13() {
        let pk = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        assert_relative_eq!(pk.cl1, 1.9041, epsilon = 5e-5);
        assert_relative_eq!(pk.k10, 0.445923, epsilon = 5e-7);
        assert_relative_eq!(pk.v2, 24.765, epsilon = 5e-4);
        assert_relative_eq!(pk.k12, 0.38642, epsilon = 5e-6);
        assert_relative_eq!(pk.k21, 0.066626, epsilon = 5e-7);
        assert_relative_eq!(pk.k13, 0.19578, epsilon = 5e-6);
        assert_relative_eq!(pk.k31, 0.0035126, epsilon = 5e-8);
        assert_eq!(pk.ke0, 0.456);
        assert_eq!(pk.k1e, 0.456);
        assert_eq!(pk.v3, 238.0);
    }

    #[test]
    fn clearance_identities() {
        let pk = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        for (lhs, rhs) in [
            (pk.k10 * pk.v1, pk.cl1),
            (pk.k12 * pk.v1, pk.cl2),
            (pk.k13 * pk.v1, pk.cl3),
            (pk.k21 * pk.v2, pk.cl2),
            (pk.k31 * pk.v3, pk.cl3),
        ] {
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn age_53_terms_vanish() {
        let d = Demographics::new(53, 177.0, 77.0, Sex::Male).unwrap();
        let pk = PkParams::derive(&d, PkPreset::SchniderCorrected).unwrap();
        assert_eq!(pk.v2, 18.9);
        assert_eq!(pk.cl2, 1.29);
    }

    #[test]
    fn uncorrected_preset_rejects_patient13() {
        let err = PkParams::derive(&patient13(), PkPreset::Uncorrected).unwrap_err();
        match err {
            ModelError::NonPhysicalPk { name, value } => {
                assert_eq!(name, "cl1");
                assert!((value + 4.92).abs() < 0.01, "cl1 = {value}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("non-physical PK parameters"));
    }

    #[test]
    fn derivation_is_bit_deterministic() {
        let a = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        let b = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn origin_is_equilibrium_and_infusion_enters_c1() {
        let pk = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        let z = PatientState::zero();
        assert_eq!(pk_derivatives(&z, 0.0, &pk), PatientState::zero());
        let d = pk_derivatives(&z, 4.27, &pk);
        assert_eq!(d, PatientState { c1: 1.0, c2: 0.0, c3: 0.0, ce: 0.0 });
        assert_eq!(step_rk4(&z, 0.0, &pk, 0.5).unwrap(), z);
    }

    #[test]
    fn equilibrium_has_zero_derivative() {
        let pk = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        for u in [0.5, 13.0, 120.0] {
            let eq = PatientState::equilibrium(&pk, u);
            let d = pk_derivatives(&eq, u, &pk);
            let norm = d.components().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < 1e-12, "norm {norm} at u={u}");
            assert_eq!(eq.ce, eq.c1);
        }
    }

    #[test]
    fn diverging_step_is_reported() {
        let pk = PkParams::derive(&patient13(), PkPreset::SchniderCorrected).unwrap();
        let err = step_rk4(&PatientState::zero(), f64::INFINITY, &pk, 0.1).unwrap_err();
        assert_eq!(err, ModelError::IntegrationDiverged);
    }
}
