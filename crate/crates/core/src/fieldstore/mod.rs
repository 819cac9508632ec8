//! Run-time lookup of baked acoustic parameters.
//!
//! The listener side is resolved over nearby visible probes, the source
//! side over the emitter lattice of each probe's field.

mod free;
mod interp;
mod params;
mod store;

pub use free::FreeField;
pub use interp::{interp_improved, interp_linear, DirectionNumerator, InterpSample, Interpolated};
pub use params::{AcousticParams, InterpMode, LookupError};
pub use store::{EmitterContext, FieldStore, LookupConfig};

use crate::geom::Vector3;
use crate::scene::Portal;

type Vec3 = Vector3<f64>;

/// Source of `P(source, listener)` lookups.
pub trait AcousticField {
    /// Per-position state reused across lookups from the same source.
    type Endpoint;

    fn speed_of_sound(&self) -> f64;

    fn delay_quantum(&self) -> f64;

    fn lookup(&self, source: Vec3, listener: Vec3) -> Result<AcousticParams, LookupError>;

    fn endpoint(&self, point: Vec3) -> Result<Self::Endpoint, LookupError>;

    /// Lookup with the listener at the portal centroid.
    fn lookup_at_portal_from(
        &self,
        endpoint: &Self::Endpoint,
        portal: &Portal,
    ) -> Result<AcousticParams, LookupError>;

    fn lookup_at_portal(
        &self,
        source: Vec3,
        portal: &Portal,
    ) -> Result<AcousticParams, LookupError> {
        self.lookup_at_portal_from(&self.endpoint(source)?, portal)
    }
}

#[cfg(test)]
mod tests;
