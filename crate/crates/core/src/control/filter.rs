use crate::Scalar;

/// Two cascaded first-order lags `1/(tf s + 1)^2` with unit DC gain.
///
/// Each section is discretized exactly under zero-order hold, so the filter
/// is stable for any step size. `tf == 0` is an identity passthrough.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lp2<T> {
    pub tf: T,
    pub x1: T,
    pub x2: T,
}

impl<T: Scalar> Lp2<T> {
    pub fn new(tf: T) -> Self {
        Self::at_rest(tf, T::zero())
    }

    /// Filter already converged on a constant input `value`.
    pub fn at_rest(tf: T, value: T) -> Self {
        Self {
            tf,
            x1: value,
            x2: value,
        }
    }

    pub fn output(&self) -> T {
        self.x2
    }

    pub fn step(&mut self, input: T, h: T) -> T {
        if self.tf <= T::zero() {
            self.x1 = input;
            self.x2 = input;
            return input;
        }
        let a = T::one() - (-h / self.tf).exp();
        self.x1 = self.x1 + a * (input - self.x1);
        self.x2 = self.x2 + a * (self.x1 - self.x2);
        self.x2
    }
}
