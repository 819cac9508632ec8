//! Per-probe parameter fields sampled on the emitter lattice.

use crate::geom::Vector3;
use crate::scene::SceneGrid;

use super::config::BakeConfig;
use super::eikonal::ProbeSolution;

type Vec3 = Vector3<f64>;

/// World axes of the six reflection lobes, in storage order.
pub const REFLECTION_AXES: [Vec3; 6] = [
    Vec3::new(0.0, 0.0, 1.0),
    Vec3::new(1.0, 0.0, 0.0),
    Vec3::new(0.0, 1.0, 0.0),
    Vec3::new(-1.0, 0.0, 0.0),
    Vec3::new(0.0, -1.0, 0.0),
    Vec3::new(0.0, 0.0, -1.0),
];

/// Lowest representable level; also used for zero energy.
pub const FLOOR_DB: f64 = -300.0;

/// Sub-sampling of the simulation grid at which fields are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmitterLattice {
    pub stride: usize,
    pub dims: [usize; 3],
}

impl EmitterLattice {
    pub fn new(grid_dims: [usize; 3], stride: usize) -> Self {
        let stride = stride.max(1);
        let dims = grid_dims.map(|d| (d - 1) / stride + 1);
        Self { stride, dims }
    }

    /// Stride chosen so lattice spacing is as close as possible to `spacing`.
    pub fn for_grid(grid: &SceneGrid, spacing: f64) -> Self {
        let stride = (spacing / grid.cell_size()).round().max(1.0) as usize;
        Self::new(grid.dims(), stride)
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, e: [usize; 3]) -> usize {
        e[0] + self.dims[0] * (e[1] + self.dims[1] * e[2])
    }

    #[inline]
    pub fn coords(&self, j: usize) -> [usize; 3] {
        let x = j % self.dims[0];
        let r = j / self.dims[0];
        [x, r % self.dims[1], r / self.dims[1]]
    }

    #[inline]
    pub fn sim_cell(&self, e: [usize; 3]) -> [usize; 3] {
        e.map(|c| c * self.stride)
    }

    pub fn position(&self, grid: &SceneGrid, j: usize) -> Vec3 {
        grid.cell_center(self.sim_cell(self.coords(j)))
    }

    pub fn spacing(&self, grid: &SceneGrid) -> f64 {
        self.stride as f64 * grid.cell_size()
    }
}

/// Unquantized acoustic parameters derived from a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathAcoustics {
    pub delay: f64,
    pub loudness_db: f64,
    pub total_energy: f64,
    pub reflection_energy: [f64; 6],
}

/// Loudness and reverberant energy model for a path of geodesic length
/// `distance` with `events` diffractions arriving along `arrival`.
pub fn path_acoustics(
    distance: f64,
    events: u16,
    arrival: Vec3,
    cfg: &BakeConfig,
) -> PathAcoustics {
    let loudness_db =
        -20.0 * distance.max(1.0).log10() - cfg.diffraction_loss_db * f64::from(events);
    let total_energy = 10f64.powf(loudness_db / 10.0)
        * 10f64.powf(-cfg.reverb_decay_db_per_m * distance / 10.0)
        * cfg.reverb_gain;
    let from = -arrival;
    let iso = (1.0 - cfg.directional_fraction) / 6.0;
    let mut reflection_energy = [0.0; 6];
    for (e, axis) in reflection_energy.iter_mut().zip(REFLECTION_AXES) {
        let w = from.dot(axis).max(0.0);
        *e = total_energy * (cfg.directional_fraction * w * w + iso);
    }
    PathAcoustics {
        delay: distance / cfg.speed_of_sound,
        loudness_db,
        total_energy,
        reflection_energy,
    }
}

pub fn energy_to_db(e: f64) -> f64 {
    if e > 0.0 {
        (10.0 * e.log10()).max(FLOOR_DB)
    } else {
        FLOOR_DB
    }
}

/// Quantizes a level to `quantum` dB, stored in hundredths of a dB.
pub fn quantize_db(db: f64, quantum: f64) -> i16 {
    let q = (db / quantum).round() * quantum;
    (q * 100.0)
        .round()
        .clamp(f64::from(i16::MIN + 1), f64::from(i16::MAX)) as i16
}

/// Decoded values at one emitter sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmitterSample {
    pub position: Vec3,
    pub delay: f64,
    pub loudness_db: f64,
    pub reflections_db: [f64; 6],
    pub arrival: Vec3,
    pub propagation: Vec3,
    pub line_of_sight: bool,
}

/// Quantized parameters of one probe over the emitter lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterField {
    pub valid: Vec<bool>,
    pub line_of_sight: Vec<bool>,
    /// Initial delay in delay quanta.
    pub delay_counts: Vec<u16>,
    /// Initial loudness, centi-dB.
    pub loudness_cdb: Vec<i16>,
    /// Reflection loudnesses, centi-dB, in [`REFLECTION_AXES`] order.
    pub reflections_cdb: Vec<[i16; 6]>,
    /// Arrival direction at the probe.
    pub arrival: Vec<[f32; 3]>,
    /// Propagation direction at the emitter.
    pub propagation: Vec<[f32; 3]>,
}

impl ParameterField {
    pub fn len(&self) -> usize {
        self.valid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid.is_empty()
    }

    /// Encodes a probe solution onto the lattice.
    pub fn encode(
        grid: &SceneGrid,
        lattice: &EmitterLattice,
        sol: &ProbeSolution,
        cfg: &BakeConfig,
    ) -> Self {
        let n = lattice.len();
        let mut f = Self {
            valid: vec![false; n],
            line_of_sight: vec![false; n],
            delay_counts: vec![0; n],
            loudness_cdb: vec![0; n],
            reflections_cdb: vec![[0; 6]; n],
            arrival: vec![[0.0; 3]; n],
            propagation: vec![[0.0; 3]; n],
        };
        for j in 0..n {
            let cell = grid.index(lattice.sim_cell(lattice.coords(j)));
            let d = sol.distance[cell];
            if !d.is_finite() {
                continue;
            }
            let counts = (d / cfg.speed_of_sound / cfg.delay_quantum).round();
            if counts > f64::from(u16::MAX) {
                continue;
            }
            let acoustics = path_acoustics(d, sol.events[cell], sol.arrival[cell], cfg);
            f.valid[j] = true;
            f.line_of_sight[j] = sol.line_of_sight[cell];
            f.delay_counts[j] = counts as u16;
            f.loudness_cdb[j] = quantize_db(acoustics.loudness_db, cfg.loudness_quantum);
            f.reflections_cdb[j] = acoustics
                .reflection_energy
                .map(|e| quantize_db(energy_to_db(e), cfg.loudness_quantum));
            f.arrival[j] = sol.arrival[cell].to_array().map(|c| c as f32);
            f.propagation[j] = sol.propagation[cell].to_array().map(|c| c as f32);
        }
        f
    }

    pub fn sample(&self, j: usize, position: Vec3, cfg: &BakeConfig) -> Option<EmitterSample> {
        if !self.valid[j] {
            return None;
        }
        let to_vec =
            |a: [f32; 3]| Vec3::new(f64::from(a[0]), f64::from(a[1]), f64::from(a[2])).normalize();
        Some(EmitterSample {
            position,
            delay: f64::from(self.delay_counts[j]) * cfg.delay_quantum,
            loudness_db: f64::from(self.loudness_cdb[j]) / 100.0,
            reflections_db: self.reflections_cdb[j].map(|c| f64::from(c) / 100.0),
            arrival: to_vec(self.arrival[j]),
            propagation: to_vec(self.propagation[j]),
            line_of_sight: self.line_of_sight[j],
        })
    }
}
