use crate::error::{Error, Result};
use crate::geom::Vector3;
use crate::scene::SceneDescription;

type Vec3 = Vector3<f64>;

/// Probe positions: a uniform lattice followed by one probe per portal centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSet {
    pub positions: Vec<Vec3>,
    /// `(portal id, probe index)` pairs in portal id order.
    pub portal_probes: Vec<(usize, usize)>,
    /// Lattice spacing, m.
    pub spacing: f64,
}

impl ProbeSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn portal_probe(&self, portal_id: usize) -> Option<usize> {
        self.portal_probes
            .iter()
            .find(|(k, _)| *k == portal_id)
            .map(|&(_, i)| i)
    }

    pub fn lattice_count(&self) -> usize {
        self.positions.len() - self.portal_probes.len()
    }
}

/// Lays out probes deterministically (z, then y, then x; portals last).
pub fn layout_probes(scene: &SceneDescription) -> Result<ProbeSet> {
    let grid = &scene.grid;
    if grid.open_cells().next().is_none() {
        return Err(Error::NoOpenCells);
    }
    let spacing = scene.probe_spacing;
    let dims = grid.dims();
    let mut axis_points: [Vec<f64>; 3] = Default::default();
    for a in 0..3 {
        let extent = dims[a] as f64 * grid.cell_size();
        // Centered in spacing-sized tiles: at most half a spacing from each face.
        let n = ((extent / spacing - 1e-9).ceil() as usize).max(1);
        let offset = (extent - (n - 1) as f64 * spacing) / 2.0;
        axis_points[a] = (0..n)
            .map(|i| grid.origin()[a] + offset + i as f64 * spacing)
            .collect();
    }
    let mut positions = Vec::new();
    for &z in &axis_points[2] {
        for &y in &axis_points[1] {
            for &x in &axis_points[0] {
                let p = Vec3::new(x, y, z);
                if grid.is_open_point(p) {
                    positions.push(p);
                }
            }
        }
    }
    let mut portal_probes = Vec::with_capacity(scene.portals.len());
    for portal in &scene.portals {
        portal_probes.push((portal.id, positions.len()));
        positions.push(portal.centroid);
    }
    Ok(ProbeSet {
        positions,
        portal_probes,
        spacing,
    })
}
