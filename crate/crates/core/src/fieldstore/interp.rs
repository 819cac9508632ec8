//! Spatial interpolation of initial delay and direction.

use crate::geom::Vector3;
use crate::scalar::Scalar;

/// One interpolation sample: position, weight, delay and the wavefront
/// propagation direction observed at that position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpSample<T: Scalar> {
    pub position: Vector3<T>,
    pub weight: T,
    pub delay: T,
    pub direction: Vector3<T>,
}

impl<T: Scalar> InterpSample<T> {
    /// Free-space-equivalent source location: back up from the sample along
    /// its direction by the traveled distance.
    pub fn apparent_location(&self, speed_of_sound: T) -> Vector3<T> {
        self.position - self.direction * (speed_of_sound * self.delay)
    }
}

/// Numerator of the per-sample direction term of the improved scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DirectionNumerator {
    /// `y - apparent_i`: exact in free field.
    #[default]
    Apparent,
    /// `y - y_i`, the literal published form; kept for comparison.
    SamplePosition,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interpolated<T: Scalar> {
    pub delay: T,
    pub direction: Vector3<T>,
}

fn total_weight<T: Scalar>(samples: &[InterpSample<T>]) -> Option<T> {
    let w: T = samples.iter().map(|s| s.weight).sum();
    (w > T::zero() && w.is_finite()).then_some(w)
}

fn blended_direction<T: Scalar>(samples: &[InterpSample<T>], total: T) -> Vector3<T> {
    samples
        .iter()
        .map(|s| s.direction * (s.weight / total))
        .sum::<Vector3<T>>()
        .try_normalize(T::epsilon())
        .unwrap_or(Vector3::axis(2, false))
}

/// Weighted arithmetic mean of delays and directions (direction re-normalized).
/// `None` when the total weight is zero.
pub fn interp_linear<T: Scalar>(samples: &[InterpSample<T>]) -> Option<Interpolated<T>> {
    let total = total_weight(samples)?;
    let delay = samples.iter().map(|s| s.delay * (s.weight / total)).sum();
    Some(Interpolated {
        delay,
        direction: blended_direction(samples, total),
    })
}

/// Apparent-location interpolation: each sample predicts delay and
/// direction at `y` assuming free propagation from its apparent location;
/// predictions are blended with the sample weights.
///
/// A sample whose apparent location coincides with `y` contributes zero
/// delay and no direction term.
pub fn interp_improved<T: Scalar>(
    samples: &[InterpSample<T>],
    y: Vector3<T>,
    speed_of_sound: T,
    numerator: DirectionNumerator,
) -> Option<Interpolated<T>> {
    let total = total_weight(samples)?;
    let tiny = T::epsilon() * T::lit(16.0) * (T::one() + y.norm());
    let mut delay = T::zero();
    let mut dir = Vector3::zero();
    for s in samples {
        let w = s.weight / total;
        let apparent = s.apparent_location(speed_of_sound);
        let to_y = y - apparent;
        let dist = to_y.norm();
        if dist <= tiny {
            continue;
        }
        delay += w * dist / speed_of_sound;
        let num = match numerator {
            DirectionNumerator::Apparent => to_y,
            DirectionNumerator::SamplePosition => y - s.position,
        };
        dir += num * (w / dist);
    }
    let direction = dir
        .try_normalize(T::epsilon())
        .unwrap_or_else(|| blended_direction(samples, total));
    Some(Interpolated { delay, direction })
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = Vector3<f64>;
    const C: f64 = 340.0;

    fn free_sample(src: V, at: V, w: f64) -> InterpSample<f64> {
        InterpSample {
            position: at,
            weight: w,
            delay: at.distance(src) / C,
            direction: (at - src).normalize(),
        }
    }

    #[test]
    fn linear_midpoint() {
        let mk = |d: f64| InterpSample {
            position: V::zero(),
            weight: 0.5,
            delay: d,
            direction: V::new(1.0, 0.0, 0.0),
        };
        let r = interp_linear(&[mk(0.1), mk(0.2)]).unwrap();
        assert!((r.delay - 0.15).abs() < 1e-15);
        assert_eq!(r.direction, V::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn linear_idempotent_on_equal_samples() {
        let s = free_sample(V::zero(), V::new(3.0, 4.0, 0.0), 0.25);
        let r = interp_linear(&[s; 4]).unwrap();
        assert!((r.delay - s.delay).abs() < 1e-15);
        assert!((r.direction - s.direction).norm() < 1e-15);
    }

    #[test]
    fn zero_weight_is_none() {
        let mut s = free_sample(V::zero(), V::new(1.0, 0.0, 0.0), 0.0);
        assert!(interp_linear(&[s]).is_none());
        s.weight = 0.0;
        assert!(interp_improved(&[s], V::zero(), C, DirectionNumerator::Apparent).is_none());
    }

    #[test]
    fn single_sample_extrapolates_one_meter() {
        let src = V::new(-2.0, 1.0, 0.0);
        let s = free_sample(src, V::new(3.0, 1.0, 0.0), 1.0);
        let y = s.position + s.direction * 1.0;
        let r = interp_improved(&[s], y, C, DirectionNumerator::Apparent).unwrap();
        assert!((r.delay - (s.delay + 1.0 / C)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_is_exact() {
        let src = V::new(0.0, 10.0, 0.0);
        let y = V::new(0.0, 0.0, 0.0);
        let a = free_sample(src, V::new(-1.5, 0.0, 0.0), 0.5);
        let b = free_sample(src, V::new(1.5, 0.0, 0.0), 0.5);
        let r = interp_improved(&[a, b], y, C, DirectionNumerator::Apparent).unwrap();
        assert!((r.delay - 10.0 / C).abs() < 1e-9);
        assert!((r.direction - V::new(0.0, -1.0, 0.0)).norm() < 1e-9);
        let lin = interp_linear(&[a, b]).unwrap();
        assert!(lin.delay > r.delay + 1e-4);
    }

    #[test]
    fn literal_numerator_differs_off_axis() {
        let src = V::new(0.0, 10.0, 0.0);
        let y = V::new(0.3, 0.0, 0.0);
        let a = free_sample(src, V::new(-1.5, 0.0, 0.0), 0.5);
        let b = free_sample(src, V::new(1.5, 0.0, 0.0), 0.5);
        let exact = (y - src).normalize();
        let r = interp_improved(&[a, b], y, C, DirectionNumerator::Apparent).unwrap();
        let lit = interp_improved(&[a, b], y, C, DirectionNumerator::SamplePosition).unwrap();
        assert!((r.direction - exact).norm() < 1e-12);
        assert!((lit.direction - exact).norm() > 1e-3);
    }

    #[test]
    fn coincident_apparent_location_drops_direction_term() {
        let src = V::new(1.0, 2.0, 3.0);
        let s = free_sample(src, V::new(4.0, 2.0, 3.0), 1.0);
        let r = interp_improved(&[s], src, C, DirectionNumerator::Apparent).unwrap();
        assert_eq!(r.delay, 0.0);
        assert!((r.direction - s.direction).norm() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let src = Vector3::<f32>::new(0.0, 10.0, 0.0);
        let mk = |x: f32| {
            let at = Vector3::new(x, 0.0, 0.0);
            InterpSample {
                position: at,
                weight: 0.5f32,
                delay: at.distance(src) / 340.0,
                direction: (at - src).normalize(),
            }
        };
        let r = interp_improved(
            &[mk(-1.0), mk(1.0)],
            Vector3::zero(),
            340.0f32,
            DirectionNumerator::Apparent,
        )
        .unwrap();
        assert!((r.delay - 10.0 / 340.0).abs() < 1e-6);
    }
}
