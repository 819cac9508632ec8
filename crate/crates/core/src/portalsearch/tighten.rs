use crate::geom::Vector3;
use crate::scalar::Scalar;
use crate::scene::Portal;

/// String-tightened path estimate through one portal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tightened<T: Scalar> {
    /// Apparent source location seen from the portal centroid.
    pub apparent_source: Vector3<T>,
    /// Apparent listener location seen from the portal centroid.
    pub apparent_listener: Vector3<T>,
    /// Point of the portal polygon on the tightened path.
    pub pierce_point: Vector3<T>,
    /// Path length through the pierce point between the apparent ends, m.
    pub corrected_length: T,
}

/// Backs up from `at` against the arrival direction by the traveled distance.
pub fn apparent_location<T: Scalar>(
    at: Vector3<T>,
    delay: T,
    direction: Vector3<T>,
    speed_of_sound: T,
) -> Vector3<T> {
    at - direction * (speed_of_sound * delay)
}

/// Tightens the path through `portal` given the delay and arrival direction
/// at its centroid from the source and from the listener.
pub fn string_tighten_with<T: Scalar>(
    portal: &Portal<T>,
    source_at_portal: (T, Vector3<T>),
    listener_at_portal: (T, Vector3<T>),
    speed_of_sound: T,
) -> Tightened<T> {
    let xk = portal.centroid;
    let src = apparent_location(xk, source_at_portal.0, source_at_portal.1, speed_of_sound);
    let lst = apparent_location(
        xk,
        listener_at_portal.0,
        listener_at_portal.1,
        speed_of_sound,
    );
    let pierce = portal.closest_point(src, lst);
    Tightened {
        apparent_source: src,
        apparent_listener: lst,
        pierce_point: pierce,
        corrected_length: src.distance(pierce) + lst.distance(pierce),
    }
}

/// Opposite-side test on the arrival directions at the portal centroid.
pub fn pierce_test_with<T: Scalar>(
    portal: &Portal<T>,
    source_direction: Vector3<T>,
    listener_direction: Vector3<T>,
) -> bool {
    source_direction.dot(portal.normal) * listener_direction.dot(portal.normal) < T::zero()
}
