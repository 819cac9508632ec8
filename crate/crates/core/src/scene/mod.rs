//! Scene geometry: voxel occupancy plus explicitly authored portals.

mod grid;
mod portal;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use grid::SceneGrid;
pub use portal::{portal_geometry, Portal, PortalGeometry};

use crate::error::{Error, Result};
use crate::geom::Vector3;

type Vec3 = Vector3<f64>;

pub const PROBE_SPACING_RANGE: (f64, f64) = (0.5, 4.0);
pub const EMITTER_SPACING_RANGE: (f64, f64) = (1.0, 1.5);

/// Validated, immutable scene.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneDescription {
    pub grid: SceneGrid,
    pub portals: Vec<Portal>,
    pub probe_spacing: f64,
    pub emitter_spacing: f64,
}

/// On-disk scene layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub cell_size: f64,
    pub origin: [f64; 3],
    pub dims: [usize; 3],
    /// `[start, length]` runs over linear cell indices (x fastest, then y, then z).
    #[serde(default)]
    pub solid_cells: Vec<[usize; 2]>,
    #[serde(default)]
    pub portals: Vec<PortalFile>,
    pub probe_spacing: f64,
    pub emitter_spacing: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortalFile {
    pub vertices: Vec<[f64; 3]>,
}

impl SceneDescription {
    /// Builds a scene from a grid and portal polygons; portals get ids `1..=N`
    /// in input order.
    pub fn new(
        grid: SceneGrid,
        polygons: Vec<Vec<Vec3>>,
        probe_spacing: f64,
        emitter_spacing: f64,
    ) -> Result<Self> {
        check_range("probe_spacing", probe_spacing, PROBE_SPACING_RANGE)?;
        check_range("emitter_spacing", emitter_spacing, EMITTER_SPACING_RANGE)?;
        let portals = polygons
            .into_iter()
            .enumerate()
            .map(|(i, poly)| Portal::new(i + 1, poly))
            .collect::<Result<Vec<_>>>()?;
        for p in &portals {
            check_portal_open(&grid, p)?;
        }
        Ok(Self {
            grid,
            portals,
            probe_spacing,
            emitter_spacing,
        })
    }

    pub fn from_file(file: SceneFile) -> Result<Self> {
        let n: usize = file.dims.iter().product();
        let mut solid = vec![false; n];
        for [start, len] in &file.solid_cells {
            let end = start.checked_add(*len).filter(|&e| e <= n).ok_or_else(|| {
                Error::InvalidGrid(format!("solid run [{start}, {len}] exceeds {n} cells"))
            })?;
            solid[*start..end].iter_mut().for_each(|s| *s = true);
        }
        let grid = SceneGrid::new(file.origin.into(), file.cell_size, file.dims, solid)?;
        let polys = file
            .portals
            .into_iter()
            .map(|p| p.vertices.into_iter().map(Vec3::from).collect())
            .collect();
        Self::new(grid, polys, file.probe_spacing, file.emitter_spacing)
    }

    pub fn to_file(&self) -> SceneFile {
        let mut runs: Vec<[usize; 2]> = Vec::new();
        for (i, &s) in self.grid.occupancy().iter().enumerate() {
            if !s {
                continue;
            }
            match runs.last_mut() {
                Some(r) if r[0] + r[1] == i => r[1] += 1,
                _ => runs.push([i, 1]),
            }
        }
        SceneFile {
            cell_size: self.grid.cell_size(),
            origin: self.grid.origin().into(),
            dims: self.grid.dims(),
            solid_cells: runs,
            portals: self
                .portals
                .iter()
                .map(|p| PortalFile {
                    vertices: p.polygon.iter().map(|v| (*v).into()).collect(),
                })
                .collect(),
            probe_spacing: self.probe_spacing,
            emitter_spacing: self.emitter_spacing,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scene serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// SHA-256 over a canonical binary encoding of the scene content.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"portalwave-scene-v1");
        for c in self.grid.origin().to_array() {
            h.update(c.to_le_bytes());
        }
        h.update(self.grid.cell_size().to_le_bytes());
        for d in self.grid.dims() {
            h.update((d as u64).to_le_bytes());
        }
        let mut byte = 0u8;
        for (i, &s) in self.grid.occupancy().iter().enumerate() {
            if s {
                byte |= 1 << (i % 8);
            }
            if i % 8 == 7 {
                h.update([byte]);
                byte = 0;
            }
        }
        h.update([byte]);
        h.update(self.probe_spacing.to_le_bytes());
        h.update(self.emitter_spacing.to_le_bytes());
        h.update((self.portals.len() as u64).to_le_bytes());
        for p in &self.portals {
            h.update((p.polygon.len() as u64).to_le_bytes());
            for v in &p.polygon {
                for c in v.to_array() {
                    h.update(c.to_le_bytes());
                }
            }
        }
        h.finalize().into()
    }

    pub fn portal(&self, id: usize) -> Option<&Portal> {
        id.checked_sub(1).and_then(|i| self.portals.get(i))
    }
}

/// Reads and validates a scene JSON file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneDescription> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SceneDescription::from_json(&text)
}

fn check_range(name: &str, v: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{name} = {v} outside [{lo}, {hi}]"
        )))
    }
}

fn check_portal_open(grid: &SceneGrid, p: &Portal) -> Result<()> {
    let mut pts = vec![p.centroid];
    pts.extend(p.polygon.iter().map(|v| *v + (p.centroid - *v) * 0.05));
    for q in pts {
        if !grid.is_open_point(q) {
            return Err(Error::InvalidPortal {
                id: p.id,
                reason: format!(
                    "polygon touches a solid or out-of-bounds cell near ({:.3}, {:.3}, {:.3})",
                    q.x, q.y, q.z
                ),
            });
        }
    }
    Ok(())
}
