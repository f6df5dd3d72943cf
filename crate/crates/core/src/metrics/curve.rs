use super::MetricsError;
use crate::patient::{hill_bis, HillParams};
use crate::Scalar;

/// Samples the Hill curve on a uniform grid `0..=ce_max`.
pub fn ce_bis_curve<T: Scalar>(
    hill: &HillParams<T>,
    ce_max: T,
    n_points: usize,
) -> Result<Vec<(T, T)>, MetricsError> {
    if !(ce_max.is_finite() && ce_max > T::zero()) {
        return Err(MetricsError::InvalidArgument("ce_max must be finite and > 0"));
    }
    if n_points < 2 {
        return Err(MetricsError::InvalidArgument("n_points must be >= 2"));
    }
    let last = T::lit((n_points - 1) as f64);
    Ok((0..n_points)
        .map(|k| {
            let ce = ce_max * T::lit(k as f64) / last;
            (ce, hill_bis(ce, hill))
        })
        .collect())
}

/// Concentration at which the curve crosses `bis`, found by bisection.
///
/// `None` when `bis` is outside the curve's range (at or above `e0`, or at or
/// below the asymptote `e0 - emax`).
pub fn ce_at_bis<T: Scalar>(hill: &HillParams<T>, bis: T) -> Option<T> {
    if bis >= hill.e0 || bis <= hill.e0 - hill.emax {
        return None;
    }
    let mut lo = T::zero();
    let mut hi = hill.ce50;
    let mut guard = 0;
    while hill_bis(hi, hill) > bis {
        hi = hi + hi;
        guard += 1;
        if guard > 200 || !hi.is_finite() {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if hill_bis(mid, hill) > bis {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / T::lit(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p13() -> HillParams<f64> {
        HillParams::new(93.1, 96.58, 7.42, 3.0).unwrap()
    }

    #[test]
    fn curve_starts_at_baseline() {
        let c = ce_bis_curve(&p13(), 12.0, 121).unwrap();
        assert_eq!(c.len(), 121);
        assert_eq!(c[0], (0.0, 93.1));
        assert!((c[120].0 - 12.0).abs() < 1e-12);
        assert!(c.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn crossing_of_fifty() {
        let ce = ce_at_bis(&p13(), 50.0).unwrap();
        assert!((ce - 6.905).abs() < 5e-4, "ce={ce}");
        // and the sampled curve brackets it
        let c = ce_bis_curve(&p13(), 12.0, 1201).unwrap();
        let k = c.iter().position(|&(_, b)| b <= 50.0).unwrap();
        assert!(c[k - 1].0 <= ce && ce <= c[k].0);
    }

    #[test]
    fn out_of_range() {
        assert_eq!(ce_at_bis(&p13(), 95.0), None);
        assert_eq!(ce_at_bis(&p13(), -5.0), None);
        assert!(ce_bis_curve(&p13(), 0.0, 10).is_err());
        assert!(ce_bis_curve(&p13(), 10.0, 1).is_err());
    }
}
