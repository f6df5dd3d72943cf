use super::ControlError;
use crate::Scalar;

/// Population Hill parameters used when the individual curve is unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationHill<T> {
    pub emax: T,
    pub gamma: T,
    pub ce50: T,
}

impl<T: Scalar> Default for PopulationHill<T> {
    /// Population averages: emax 87.5, gamma 2.69, ce50 4.92 mg/L.
    fn default() -> Self {
        Self {
            emax: T::lit(87.5),
            gamma: T::lit(2.69),
            ce50: T::lit(4.92),
        }
    }
}

impl<T: Scalar> PopulationHill<T> {
    /// Completes the curve with the patient's measured awake baseline.
    pub fn with_e0(self, e0: T) -> NominalHill<T> {
        NominalHill {
            e0,
            emax: self.emax,
            gamma: self.gamma,
            ce50: self.ce50,
        }
    }
}

/// Hill curve the controller inverts: population shape, measured baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalHill<T> {
    pub e0: T,
    pub emax: T,
    pub gamma: T,
    pub ce50: T,
}

impl<T: Scalar> NominalHill<T> {
    pub fn bis(&self, ce: T) -> T {
        if ce <= T::zero() {
            return self.e0;
        }
        let frac = T::one() / (T::one() + (self.ce50 / ce).powf(self.gamma));
        self.e0 - self.emax * frac
    }
}

/// Effect-site concentration that the nominal curve maps to `bis`.
///
/// Returns 0 at or above the baseline.
pub fn inverse_hill<T: Scalar>(bis: T, nominal: &NominalHill<T>) -> Result<T, ControlError> {
    if bis >= nominal.e0 {
        return Ok(T::zero());
    }
    let denominator = nominal.emax - nominal.e0 + bis;
    if !(denominator > T::zero()) {
        return Err(ControlError::InverseHillDomain {
            denominator: denominator.as_f64(),
        });
    }
    let ratio = (nominal.e0 - bis) / denominator;
    Ok(nominal.ce50 * ratio.powf(T::one() / nominal.gamma))
}
