use super::ModelError;
use crate::Scalar;

/// Sigmoid Emax parameters mapping effect-site concentration to BIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillParams<T> {
    pub e0: T,
    pub emax: T,
    pub ce50: T,
    pub gamma: T,
}

impl<T: Scalar> HillParams<T> {
    pub fn new(e0: T, emax: T, ce50: T, gamma: T) -> Result<Self, ModelError> {
        let checks = [
            ("ce50", ce50, ce50 > T::zero(), "must be > 0"),
            ("gamma", gamma, gamma > T::zero(), "must be > 0"),
            ("emax", emax, emax > T::zero(), "must be > 0"),
            (
                "e0",
                e0,
                e0 > T::zero() && e0 <= T::lit(100.0),
                "must lie in (0, 100]",
            ),
        ];
        for (field, value, ok, constraint) in checks {
            if !(value.is_finite() && ok) {
                return Err(ModelError::InvalidHill {
                    field,
                    constraint,
                    value: value.as_f64(),
                });
            }
        }
        Ok(Self {
            e0,
            emax,
            ce50,
            gamma,
        })
    }

    #[inline]
    pub fn bis(&self, ce: T) -> T {
        hill_bis(ce, self)
    }

    pub fn cast<U: Scalar>(&self) -> HillParams<U> {
        HillParams {
            e0: U::lit(self.e0.as_f64()),
            emax: U::lit(self.emax.as_f64()),
            ce50: U::lit(self.ce50.as_f64()),
            gamma: U::lit(self.gamma.as_f64()),
        }
    }
}

/// Raw (unclamped) BIS for effect-site concentration `ce`.
///
/// Can go negative when `emax > e0`; display clamping is the sensor's job.
pub fn hill_bis<T: Scalar>(ce: T, hill: &HillParams<T>) -> T {
    if ce <= T::zero() {
        return hill.e0;
    }
    // ce^g / (ce^g + ce50^g) written as 1 / (1 + (ce50/ce)^g) to avoid overflow.
    let frac = T::one() / (T::one() + (hill.ce50 / ce).powf(hill.gamma));
    hill.e0 - hill.emax * frac
}
