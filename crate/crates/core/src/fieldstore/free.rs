use crate::bake::{energy_to_db, path_acoustics, BakeConfig};
use crate::geom::Vector3;
use crate::scene::Portal;

use super::params::{AcousticParams, LookupError};
use super::AcousticField;

type Vec3 = Vector3<f64>;

/// Analytic free-field parameters with baked-style delay quantization.
///
/// Stands in for a dataset where exact answers are needed, such as
/// randomized checks of the portal culling bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeField {
    pub config: BakeConfig,
}

impl FreeField {
    pub fn new(config: BakeConfig) -> Self {
        Self { config }
    }
}

impl Default for FreeField {
    fn default() -> Self {
        Self::new(BakeConfig::default())
    }
}

impl AcousticField for FreeField {
    type Endpoint = Vec3;

    fn speed_of_sound(&self) -> f64 {
        self.config.speed_of_sound
    }

    fn delay_quantum(&self) -> f64 {
        self.config.delay_quantum
    }

    fn lookup(&self, source: Vec3, listener: Vec3) -> Result<AcousticParams, LookupError> {
        if !source.is_finite() || !listener.is_finite() {
            return Err(LookupError::OutOfBounds(
                if source.is_finite() { listener } else { source }.to_array(),
            ));
        }
        let d = source.distance(listener);
        let direction = (listener - source)
            .try_normalize(1e-12)
            .unwrap_or(Vec3::axis(2, false));
        let a = path_acoustics(d, 0, direction, &self.config);
        let q = self.config.delay_quantum;
        Ok(AcousticParams {
            delay: (a.delay / q).round() * q,
            loudness_db: a.loudness_db,
            direction,
            reflections_db: a.reflection_energy.map(energy_to_db),
        })
    }

    fn endpoint(&self, point: Vec3) -> Result<Vec3, LookupError> {
        Ok(point)
    }

    fn lookup_at_portal_from(
        &self,
        endpoint: &Vec3,
        portal: &Portal,
    ) -> Result<AcousticParams, LookupError> {
        self.lookup(*endpoint, portal.centroid)
    }
}
