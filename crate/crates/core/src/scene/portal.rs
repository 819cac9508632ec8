//! Portal polygons: geometric properties and the constrained two-point
//! distance minimizer used by string tightening.

use crate::error::{Error, Result};
use crate::geom::Vector3;
use crate::scalar::Scalar;

/// Centroid, unit normal, bounding radius and area of a planar polygon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortalGeometry<T: Scalar> {
    pub centroid: Vector3<T>,
    pub normal: Vector3<T>,
    pub radius: T,
    pub area: T,
}

/// A convex planar opening whose open area can change at runtime.
///
/// The dynamic open fraction is not stored here; see [`crate::engine::Engine`].
#[derive(Clone, Debug, PartialEq)]
pub struct Portal<T: Scalar = f64> {
    /// Dense 1-based index.
    pub id: usize,
    pub polygon: Vec<Vector3<T>>,
    pub centroid: Vector3<T>,
    pub normal: Vector3<T>,
    pub radius: T,
    pub area: T,
}

/// Computes polygon properties. The normal follows the vertex winding
/// (counter-clockwise when viewed from the side the normal points to).
pub fn portal_geometry<T: Scalar>(vertices: &[Vector3<T>]) -> Result<PortalGeometry<T>> {
    if vertices.len() < 3 {
        return Err(Error::DegeneratePolygon(format!(
            "{} vertices, need at least 3",
            vertices.len()
        )));
    }
    let n = T::lit(vertices.len() as f64);
    let mean = vertices.iter().copied().sum::<Vector3<T>>() / n;

    let mut area_vec = Vector3::zero();
    for (i, &v) in vertices.iter().enumerate() {
        let w = vertices[(i + 1) % vertices.len()];
        area_vec += (v - mean).cross(w - mean);
    }
    let twice_area = area_vec.norm();
    let extent = vertices
        .iter()
        .map(|v| v.distance(mean))
        .fold(T::zero(), T::max);
    if !(twice_area > T::lit(1e-12) * extent * extent) || extent <= T::zero() {
        return Err(Error::DegeneratePolygon(
            "zero area (collinear vertices)".into(),
        ));
    }
    let normal = area_vec / twice_area;

    // Area-weighted centroid of the fan about the vertex mean.
    let mut weighted = Vector3::zero();
    let mut total = T::zero();
    for (i, &v) in vertices.iter().enumerate() {
        let w = vertices[(i + 1) % vertices.len()];
        let a = (v - mean).cross(w - mean).dot(normal);
        weighted += (mean + v + w) * (a / T::lit(3.0));
        total += a;
    }
    let centroid = weighted / total;
    let radius = vertices
        .iter()
        .map(|v| v.distance(centroid))
        .fold(T::zero(), T::max);

    Ok(PortalGeometry {
        centroid,
        normal,
        radius,
        area: twice_area / T::lit(2.0),
    })
}

impl<T: Scalar> Portal<T> {
    /// Builds a portal, checking the polygon is planar and convex.
    pub fn new(id: usize, polygon: Vec<Vector3<T>>) -> Result<Self> {
        let g = portal_geometry(&polygon).map_err(|e| Error::InvalidPortal {
            id,
            reason: e.to_string(),
        })?;
        let tol = T::lit(1e-6) * g.radius;
        for (i, v) in polygon.iter().enumerate() {
            let off = (*v - g.centroid).dot(g.normal).abs();
            if off > tol {
                return Err(Error::InvalidPortal {
                    id,
                    reason: format!("vertex {i} is {off} m off the polygon plane"),
                });
            }
        }
        let m = polygon.len();
        for i in 0..m {
            let a = polygon[i];
            let b = polygon[(i + 1) % m];
            let c = polygon[(i + 2) % m];
            let turn = (b - a).cross(c - b).dot(g.normal);
            let scale = (b - a).norm().max((c - b).norm());
            if turn < -tol * scale {
                return Err(Error::InvalidPortal {
                    id,
                    reason: format!("polygon is not convex at vertex {}", (i + 1) % m),
                });
            }
        }
        Ok(Self {
            id,
            polygon,
            centroid: g.centroid,
            normal: g.normal,
            radius: g.radius,
            area: g.area,
        })
    }

    /// Point-in-polygon test for points in (or near) the portal plane.
    /// `slack` is a distance in meters by which edges are pushed outward.
    pub fn contains_projected(&self, p: Vector3<T>, slack: T) -> bool {
        let m = self.polygon.len();
        (0..m).all(|i| {
            let a = self.polygon[i];
            let b = self.polygon[(i + 1) % m];
            let e = b - a;
            let len = e.norm();
            e.cross(p - a).dot(self.normal) >= -slack * len
        })
    }

    /// Orthogonal projection onto the portal plane.
    pub fn project_to_plane(&self, p: Vector3<T>) -> Vector3<T> {
        p - self.normal * (p - self.centroid).dot(self.normal)
    }

    /// Signed distance from the portal plane.
    pub fn plane_distance(&self, p: Vector3<T>) -> T {
        (p - self.centroid).dot(self.normal)
    }

    /// Finds the point of the polygon minimizing `|a - p| + |b - p|`.
    ///
    /// If both points are on the same side, `b` is mirrored through the
    /// plane (distances to in-plane points are unchanged). The straight
    /// crossing is returned when it lies inside the polygon; otherwise the
    /// minimum is on the boundary, found by golden-section search per edge.
    pub fn closest_point(&self, a: Vector3<T>, b: Vector3<T>) -> Vector3<T> {
        let da = self.plane_distance(a);
        let db = self.plane_distance(b);
        let two = T::lit(2.0);
        let b_mirror = if da * db > T::zero() {
            b - self.normal * (two * db)
        } else {
            b
        };
        let dbm = self.plane_distance(b_mirror);
        let tiny = T::lit(1e-12) * (T::one() + self.radius);
        let inside_slack = T::lit(1e-12) * (T::one() + self.radius);

        if (da - dbm).abs() > tiny {
            let t = da / (da - dbm);
            let q = self.project_to_plane(a + (b_mirror - a) * t);
            if self.contains_projected(q, inside_slack) {
                return q;
            }
        } else {
            // Both endpoints in the plane: any polygon point on segment ab is optimal.
            for cand in [a, b] {
                let q = self.project_to_plane(cand);
                if self.contains_projected(q, inside_slack) {
                    return q;
                }
            }
        }

        let objective = |p: Vector3<T>| a.distance(p) + b.distance(p);
        let m = self.polygon.len();
        let mut best = self.polygon[0];
        let mut best_val = objective(best);
        for i in 0..m {
            let p0 = self.polygon[i];
            let p1 = self.polygon[(i + 1) % m];
            let p = golden_section_on_segment(p0, p1, &objective);
            let v = objective(p);
            if v < best_val {
                best_val = v;
                best = p;
            }
        }
        best
    }
}

/// Minimizes a convex function restricted to the segment `p0`-`p1`.
fn golden_section_on_segment<T: Scalar>(
    p0: Vector3<T>,
    p1: Vector3<T>,
    f: &impl Fn(Vector3<T>) -> T,
) -> Vector3<T> {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let at = |t: T| p0 + (p1 - p0) * t;
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = f(at(x1));
    let mut f2 = f(at(x2));
    let eps = T::epsilon() * T::lit(4.0);
    for _ in 0..96 {
        if hi - lo <= eps {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = f(at(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = f(at(x2));
        }
    }
    // Endpoints are candidates too; golden section never evaluates them.
    let mid = at((lo + hi) / T::lit(2.0));
    [at(T::zero()), at(T::one()), mid]
        .into_iter()
        .min_by(|u, v| {
            f(*u)
                .partial_cmp(&f(*v))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(mid)
}
