//! Offline precomputation of per-probe acoustic parameter fields.
//!
//! Every probe (lattice probes plus one per portal centroid) acts as a
//! source; its first-arrival field over the simulation grid is sub-sampled
//! on the emitter lattice, quantized, and stored. Portals are treated as
//! fully open.

mod config;
mod eikonal;
mod field;
pub mod format;
mod probes;

use std::path::Path;

use rayon::prelude::*;

pub use config::{
    BakeConfig, DELAY_QUANTUM, INITIAL_WINDOW, LOUDNESS_QUANTUM, REFLECTIONS_WINDOW, SPEED_OF_SOUND,
};
pub use eikonal::{solve_probe, ProbeSolution, SolverParams};
pub use field::{
    energy_to_db, path_acoustics, quantize_db, EmitterLattice, EmitterSample, ParameterField,
    PathAcoustics, FLOOR_DB, REFLECTION_AXES,
};
pub use probes::{layout_probes, ProbeSet};

use crate::error::{Error, Result};
use crate::geom::Vector3;
use crate::scene::{SceneDescription, SceneGrid};

type Vec3 = Vector3<f64>;

/// All baked fields for a scene.
#[derive(Clone, Debug, PartialEq)]
pub struct BakedDataset {
    pub config: BakeConfig,
    pub scene_hash: [u8; 32],
    /// Occupancy copy used for runtime visibility checks.
    pub grid: SceneGrid,
    pub lattice: EmitterLattice,
    pub probes: ProbeSet,
    pub fields: Vec<ParameterField>,
}

impl BakedDataset {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        format::encode(self)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        format::decode(buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }

    pub fn emitter_position(&self, j: usize) -> Vec3 {
        self.lattice.position(&self.grid, j)
    }
}

fn solver_params(config: &BakeConfig) -> SolverParams {
    SolverParams {
        max_distance: config.max_distance,
        bend_threshold_deg: config.bend_threshold_deg,
    }
}

/// Solves and encodes the field of a single probe.
pub fn bake_probe(
    scene: &SceneDescription,
    probe: Vec3,
    config: &BakeConfig,
) -> Result<ParameterField> {
    config.validate()?;
    let sol = solve_probe(&scene.grid, probe, &solver_params(config))?;
    let lattice = EmitterLattice::for_grid(&scene.grid, scene.emitter_spacing);
    Ok(ParameterField::encode(&scene.grid, &lattice, &sol, config))
}

/// Unquantized solution for one probe on the full simulation grid.
pub fn solve_probe_dense(
    scene: &SceneDescription,
    probe: Vec3,
    config: &BakeConfig,
) -> Result<ProbeSolution> {
    solve_probe(&scene.grid, probe, &solver_params(config))
}

/// Bakes every probe. Output is independent of thread scheduling.
pub fn bake_all(scene: &SceneDescription, config: &BakeConfig) -> Result<BakedDataset> {
    config.validate()?;
    let probes = layout_probes(scene)?;
    let lattice = EmitterLattice::for_grid(&scene.grid, scene.emitter_spacing);
    let params = solver_params(config);
    let fields = probes
        .positions
        .par_iter()
        .map(|&p| {
            let sol = solve_probe(&scene.grid, p, &params)?;
            Ok(ParameterField::encode(&scene.grid, &lattice, &sol, config))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BakedDataset {
        config: *config,
        scene_hash: scene.content_hash(),
        grid: scene.grid.clone(),
        lattice,
        probes,
        fields,
    })
}
