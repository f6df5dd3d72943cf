use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NoiseKind {
    #[default]
    None,
    Gaussian,
}

/// Additive BIS sensor noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    pub kind: NoiseKind,
    /// Standard deviation in BIS units.
    pub sigma: T,
}

impl<T: Scalar> Default for NoiseModel<T> {
    fn default() -> Self {
        Self {
            kind: NoiseKind::None,
            sigma: T::lit(2.0),
        }
    }
}

impl<T: Scalar> NoiseModel<T> {
    pub fn gaussian(sigma: T) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            sigma,
        }
    }
}

/// Draws one noise sample. `None` and `sigma == 0` never touch the generator.
pub fn noise_sample<T: Scalar, R: Rng + ?Sized>(model: &NoiseModel<T>, rng: &mut R) -> T {
    match model.kind {
        NoiseKind::None => T::zero(),
        NoiseKind::Gaussian if model.sigma <= T::zero() => T::zero(),
        NoiseKind::Gaussian => {
            let normal = Normal::new(0.0, model.sigma.as_f64()).expect("finite sigma");
            T::lit(normal.sample(rng))
        }
    }
}

/// Rectangular BIS offset active on `[start, start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse<T> {
    pub start: T,
    pub duration: T,
    pub amplitude: T,
}

/// Sum of possibly overlapping pulses added to the true BIS.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DisturbanceProfile<T> {
    pub pulses: Vec<Pulse<T>>,
}

impl<T: Scalar> DisturbanceProfile<T> {
    pub fn new(pulses: Vec<Pulse<T>>) -> Self {
        Self { pulses }
    }

    pub fn single(start: T, duration: T, amplitude: T) -> Self {
        Self::new(vec![Pulse {
            start,
            duration,
            amplitude,
        }])
    }

    /// Total offset at time `t` [min].
    pub fn at(&self, t: T) -> T {
        self.pulses
            .iter()
            .filter(|p| p.start <= t && t < p.start + p.duration)
            .map(|p| p.amplitude)
            .fold(T::zero(), |a, b| a + b)
    }

    /// Copy with every pulse moved by `dt` minutes.
    pub fn shifted(&self, dt: T) -> Self {
        Self::new(
            self.pulses
                .iter()
                .map(|p| Pulse {
                    start: p.start + dt,
                    ..*p
                })
                .collect(),
        )
    }
}

/// Piecewise-constant prescribed infusion: each `(start, rate)` holds until
/// the next start. Zero before the first segment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InfusionProfile<T> {
    segments: Vec<(T, T)>,
}

impl<T: Scalar> InfusionProfile<T> {
    /// Segments are sorted by start time; negative or non-finite rates are rejected.
    pub fn new(mut segments: Vec<(T, T)>) -> Option<Self> {
        if segments
            .iter()
            .any(|&(s, r)| !s.is_finite() || !r.is_finite() || r < T::zero())
        {
            return None;
        }
        segments.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        Some(Self { segments })
    }

    pub fn constant(rate: T) -> Self {
        Self::new(vec![(T::zero(), rate)]).expect("valid constant rate")
    }

    pub fn rate_at(&self, t: T) -> T {
        self.segments
            .iter()
            .rev()
            .find(|(s, _)| *s <= t)
            .map(|&(_, r)| r)
            .unwrap_or_else(T::zero)
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            segments: self.segments.iter().map(|&(s, r)| (s, r * k)).collect(),
        }
    }
}
