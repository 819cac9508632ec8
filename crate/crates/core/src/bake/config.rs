use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_SOUND: f64 = 340.0;
pub const DELAY_QUANTUM: f64 = 0.002;
pub const LOUDNESS_QUANTUM: f64 = 1.0;
pub const INITIAL_WINDOW: f64 = 0.010;
pub const REFLECTIONS_WINDOW: f64 = 0.080;

/// Bake parameters. All values are recorded in the bake file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BakeConfig {
    /// m/s.
    pub speed_of_sound: f64,
    /// Initial delay quantization step, s.
    pub delay_quantum: f64,
    /// Loudness quantization step, dB.
    pub loudness_quantum: f64,
    /// Initial sound window, s. Informational.
    pub initial_window: f64,
    /// Reflections accumulation window, s. Informational.
    pub reflections_window: f64,
    /// dB lost per diffraction event on the initial path.
    pub diffraction_loss_db: f64,
    /// Reverberant energy decay, dB per meter of geodesic distance.
    pub reverb_decay_db_per_m: f64,
    /// Linear gain applied to the reverberant energy.
    pub reverb_gain: f64,
    /// Fraction of reverberant energy that follows the arrival direction.
    pub directional_fraction: f64,
    /// Bends sharper than this (degrees) count as diffraction events.
    pub bend_threshold_deg: f64,
    /// Geodesic radius of each probe's simulation region, m. Infinite = whole grid.
    pub max_distance: f64,
}

impl Default for BakeConfig {
    fn default() -> Self {
        Self {
            speed_of_sound: SPEED_OF_SOUND,
            delay_quantum: DELAY_QUANTUM,
            loudness_quantum: LOUDNESS_QUANTUM,
            initial_window: INITIAL_WINDOW,
            reflections_window: REFLECTIONS_WINDOW,
            diffraction_loss_db: 6.0,
            reverb_decay_db_per_m: 0.5,
            reverb_gain: 10.0,
            directional_fraction: 0.5,
            bend_threshold_deg: 30.0,
            max_distance: f64::INFINITY,
        }
    }
}

impl BakeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.speed_of_sound > 0.0 && self.speed_of_sound.is_finite()) {
            return bad("speed of sound must be > 0");
        }
        if !(self.delay_quantum > 0.0 && self.delay_quantum.is_finite()) {
            return bad("delay quantum must be > 0");
        }
        if !(self.loudness_quantum > 0.0 && self.loudness_quantum.is_finite()) {
            return bad("loudness quantum must be > 0");
        }
        if !(0.0..=1.0).contains(&self.directional_fraction) {
            return bad("directional fraction must lie in [0, 1]");
        }
        if !(self.reverb_gain > 0.0) || !(self.reverb_decay_db_per_m >= 0.0) {
            return bad("reverb gain must be > 0 and decay >= 0");
        }
        if !(self.max_distance > 0.0) {
            return bad("max distance must be > 0");
        }
        Ok(())
    }

    /// Path length represented by one delay quantum.
    pub fn delay_quantum_length(&self) -> f64 {
        self.speed_of_sound * self.delay_quantum
    }
}
