//! Dynamic portal search and occlusion over precomputed shortest-path
//! acoustic parameter fields.
//!
//! A scene is baked once with all portals open. At run time the initial
//! (shortest) sound path between a source and a listener is checked against
//! the portals, and the closing state of the portal it passes through is
//! applied to the dry and reverberant loudness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bake;
pub mod bench;
pub mod engine;
pub mod error;
pub mod fieldstore;
pub mod fixtures;
pub mod geom;
pub mod occlusion;
pub mod oracle;
pub mod portalsearch;
pub mod scalar;
pub mod scene;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use geom::{Aabb, Vector3};
pub use scalar::Scalar;

pub type Vec3 = Vector3<f64>;
pub type Vec3f = Vector3<f32>;
pub type Aabb3 = Aabb<f64>;
