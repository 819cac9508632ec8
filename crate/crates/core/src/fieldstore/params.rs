use serde::{Deserialize, Serialize};

use crate::geom::Vector3;

type Vec3 = Vector3<f64>;

/// Initial-sound and reflection parameters for one source/listener pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcousticParams {
    /// Initial delay, s.
    pub delay: f64,
    /// Initial (dry) loudness, dB.
    pub loudness_db: f64,
    /// Propagation direction of the initial wavefront at the listener.
    pub direction: Vec3,
    /// Reflection loudness per axis of [`crate::bake::REFLECTION_AXES`], dB.
    pub reflections_db: [f64; 6],
}

impl AcousticParams {
    /// Summed reflection energy over the six directions.
    pub fn reflection_energy(&self) -> f64 {
        self.reflections_db
            .iter()
            .map(|db| 10f64.powf(db / 10.0))
            .sum()
    }

    pub fn path_length(&self, speed_of_sound: f64) -> f64 {
        self.delay * speed_of_sound
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum LookupError {
    #[error("position {0:?} is outside the grid")]
    OutOfBounds([f64; 3]),
    #[error("no propagation path between source and listener")]
    NoPath,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpMode {
    Linear,
    #[default]
    Improved,
}
