use crate::geom::{Aabb, Vector3};
use crate::scalar::Scalar;
use crate::scene::Portal;

/// Margin added to the path-length bound when culling a portal by its
/// centroid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CullMargin {
    /// `2 r_k` plus one delay quantum of path length. Never rejects a portal
    /// that could pass the delay criterion.
    #[default]
    Conservative,
    /// A single `r_k`, the published form. Can reject qualifying portals
    /// when an endpoint is near a portal edge.
    SingleRadius,
}

/// Ellipsoid of admissible path lengths between two foci, with its
/// axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CullVolume<T: Scalar> {
    pub source: Vector3<T>,
    pub listener: Vector3<T>,
    /// Longest path that can still pass the delay criterion, m.
    pub l_max: T,
    /// Path length of one delay quantum, m.
    pub quantum_length: T,
    /// Bounding box of the ellipsoid with sum `l_max`.
    pub bbox: Aabb<T>,
}

/// Axis-aligned box of `{y : |y - f1| + |y - f2| <= sum}`.
pub fn ellipsoid_aabb<T: Scalar>(f1: Vector3<T>, f2: Vector3<T>, sum: T) -> Aabb<T> {
    let two = T::lit(2.0);
    let center = (f1 + f2) / two;
    let half_focal = f1.distance(f2) / two;
    let a = (sum / two).max(half_focal);
    let b2 = (a * a - half_focal * half_focal).max(T::zero());
    let u = (f2 - f1)
        .try_normalize(T::epsilon())
        .unwrap_or(Vector3::zero());
    let half = u.map(|ui| {
        (a * a * ui * ui + b2 * (T::one() - ui * ui))
            .max(T::zero())
            .sqrt()
    });
    Aabb::new(center - half, center + half)
}

impl<T: Scalar> CullVolume<T> {
    pub fn new(source: Vector3<T>, listener: Vector3<T>, l_max: T, quantum_length: T) -> Self {
        let l_max = l_max.max(source.distance(listener));
        Self {
            source,
            listener,
            l_max,
            quantum_length,
            bbox: ellipsoid_aabb(source, listener, l_max),
        }
    }

    /// Extra path length tolerated for `portal` under `margin`.
    pub fn margin(&self, portal: &Portal<T>, margin: CullMargin) -> T {
        match margin {
            CullMargin::Conservative => portal.radius * T::lit(2.0) + self.quantum_length,
            CullMargin::SingleRadius => portal.radius,
        }
    }
}

/// Bounding-box test on the portal centroid; `true` keeps the portal.
pub fn cull_bbox<T: Scalar>(portal: &Portal<T>, vol: &CullVolume<T>, margin: CullMargin) -> bool {
    let bbox = match margin {
        CullMargin::SingleRadius => vol.bbox.enlarged(portal.radius),
        CullMargin::Conservative => ellipsoid_aabb(
            vol.source,
            vol.listener,
            vol.l_max + vol.margin(portal, margin),
        ),
    };
    bbox.contains(portal.centroid)
}

/// Ellipsoid test on the portal centroid; `true` keeps the portal.
pub fn cull_ellipsoid<T: Scalar>(
    portal: &Portal<T>,
    vol: &CullVolume<T>,
    margin: CullMargin,
) -> bool {
    let sum = vol.source.distance(portal.centroid) + portal.centroid.distance(vol.listener);
    sum < vol.l_max + vol.margin(portal, margin)
}
