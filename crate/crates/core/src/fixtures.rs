//! Deterministic scenes used by tests, verification and benchmarks.
//!
//! Walls are one cell thick, floor to ceiling, and doors are vertical
//! rectangles through the middle of the wall cells. Most fixtures are
//! single-layer (2D) grids where doors span the layer height.

use crate::error::Result;
use crate::geom::Vector3;
use crate::scene::{SceneDescription, SceneGrid};

type Vec3 = Vector3<f64>;

/// Incremental 2D scene construction in cell coordinates.
#[derive(Clone, Debug)]
pub struct Floorplan {
    grid: SceneGrid,
    /// Door height in cells.
    door_layers: usize,
    portals: Vec<Vec<Vec3>>,
    pub probe_spacing: f64,
    pub emitter_spacing: f64,
}

impl Floorplan {
    /// Open single-layer floor of `nx` by `ny` cells with the origin at zero.
    pub fn new(nx: usize, ny: usize, cell_size: f64) -> Result<Self> {
        Self::with_height(nx, ny, 1, 1, cell_size)
    }

    /// `nz` layers high, with doors `door_layers` cells high.
    pub fn with_height(
        nx: usize,
        ny: usize,
        nz: usize,
        door_layers: usize,
        cell_size: f64,
    ) -> Result<Self> {
        Ok(Self {
            grid: SceneGrid::open(Vec3::zero(), cell_size, [nx, ny, nz])?,
            door_layers: door_layers.clamp(1, nz.max(1)),
            portals: Vec::new(),
            probe_spacing: 2.0,
            emitter_spacing: 1.5,
        })
    }

    pub fn grid(&self) -> &SceneGrid {
        &self.grid
    }

    fn set(&mut self, x: usize, y: usize, solid: bool) {
        for z in 0..self.grid.dims()[2] {
            self.grid.set_solid([x, y, z], solid);
        }
    }

    fn open_door_cells(&mut self, x: usize, y: usize) {
        for z in 0..self.door_layers {
            self.grid.set_solid([x, y, z], false);
        }
    }

    /// Solid column `x` over rows `y0..y1`.
    pub fn wall_x(&mut self, x: usize, y0: usize, y1: usize) -> &mut Self {
        (y0..y1).for_each(|y| self.set(x, y, true));
        self
    }

    /// Solid row `y` over columns `x0..x1`.
    pub fn wall_y(&mut self, y: usize, x0: usize, x1: usize) -> &mut Self {
        (x0..x1).for_each(|x| self.set(x, y, true));
        self
    }

    pub fn fill(&mut self, x0: usize, x1: usize, y0: usize, y1: usize, solid: bool) -> &mut Self {
        for y in y0..y1 {
            for x in x0..x1 {
                self.set(x, y, solid);
            }
        }
        self
    }

    /// Opens rows `y0..y1` of wall column `x` and marks them as a portal.
    pub fn door_x(&mut self, x: usize, y0: usize, y1: usize) -> &mut Self {
        (y0..y1).for_each(|y| self.open_door_cells(x, y));
        let cs = self.grid.cell_size();
        let h = self.door_layers as f64 * cs;
        let px = (x as f64 + 0.5) * cs;
        let (a, b) = (y0 as f64 * cs, y1 as f64 * cs);
        self.portals.push(vec![
            Vec3::new(px, a, 0.0),
            Vec3::new(px, b, 0.0),
            Vec3::new(px, b, h),
            Vec3::new(px, a, h),
        ]);
        self
    }

    /// Opens columns `x0..x1` of wall row `y` and marks them as a portal.
    pub fn door_y(&mut self, y: usize, x0: usize, x1: usize) -> &mut Self {
        (x0..x1).for_each(|x| self.open_door_cells(x, y));
        let cs = self.grid.cell_size();
        let h = self.door_layers as f64 * cs;
        let py = (y as f64 + 0.5) * cs;
        let (a, b) = (x0 as f64 * cs, x1 as f64 * cs);
        self.portals.push(vec![
            Vec3::new(a, py, 0.0),
            Vec3::new(b, py, 0.0),
            Vec3::new(b, py, h),
            Vec3::new(a, py, h),
        ]);
        self
    }

    pub fn build(&self) -> Result<SceneDescription> {
        SceneDescription::new(
            self.grid.clone(),
            self.portals.clone(),
            self.probe_spacing,
            self.emitter_spacing,
        )
    }
}

/// 20 m by 10 m, split at x = 10 m by a wall with a 2 m door.
pub fn two_room() -> SceneDescription {
    let mut f = Floorplan::new(40, 20, 0.5).expect("valid grid");
    f.wall_x(20, 0, 20).door_x(20, 8, 12);
    f.build().expect("valid fixture")
}

/// Three 10 m rooms in a row with offset 2 m doors.
pub fn three_room() -> SceneDescription {
    let mut f = Floorplan::new(60, 20, 0.5).expect("valid grid");
    f.wall_x(20, 0, 20).wall_x(40, 0, 20);
    f.door_x(20, 2, 6).door_x(40, 14, 18);
    f.build().expect("valid fixture")
}

/// 30 m square: an open courtyard with three rooms opening onto it, one
/// door each.
pub fn courtyard() -> SceneDescription {
    let mut f = Floorplan::new(60, 60, 0.5).expect("valid grid");
    f.wall_x(20, 0, 60).wall_y(30, 0, 20).wall_y(40, 21, 60);
    f.door_x(20, 10, 14).door_x(20, 34, 38).door_y(40, 38, 42);
    f.build().expect("valid fixture")
}

/// `rooms` rooms of 4 m by 6 m in a row; doors alternate between the
/// lower and upper half of each wall.
pub fn rooms_in_series(rooms: usize) -> SceneDescription {
    let rooms = rooms.max(1);
    let mut f = Floorplan::new(rooms * 8 + rooms - 1, 12, 0.5).expect("valid grid");
    for k in 1..rooms {
        let x = k * 9 - 1;
        f.wall_x(x, 0, 12);
        if k % 2 == 1 {
            f.door_x(x, 1, 5);
        } else {
            f.door_x(x, 7, 11);
        }
    }
    f.build().expect("valid fixture")
}

/// L-shaped corridor for interpolation checks: a 24 m by 6 m leg along x
/// joined to a 6 m by 24 m leg along y. Cells are a quarter of the
/// emitter spacing.
pub fn corridor() -> SceneDescription {
    let mut f = Floorplan::new(64, 64, 0.375).expect("valid grid");
    f.fill(0, 48, 16, 64, true);
    f.probe_spacing = 3.0;
    f.emitter_spacing = 1.5;
    f.build().expect("valid fixture")
}

/// Office floor, 3 m high: a 2.5 m corridor with `doors / 2` rooms of 4 m
/// by 4 m on each side, every room opening onto the corridor through a
/// 1.5 m by 2 m door. `doors` is rounded up to an even number.
pub fn office(doors: usize) -> SceneDescription {
    let per_side = doors.div_ceil(2).max(1);
    let nx = per_side * 8;
    let mut f = Floorplan::with_height(nx, 23, 6, 4, 0.5).expect("valid grid");
    // Rows 0..8 rooms, 9..14 corridor, 15..23 rooms.
    f.wall_y(8, 0, nx).wall_y(14, 0, nx);
    for r in 0..per_side {
        let x0 = r * 8;
        if r > 0 {
            f.wall_x(x0, 0, 8).wall_x(x0, 15, 23);
        }
        f.door_y(8, x0 + 3, x0 + 6);
    }
    for r in 0..per_side {
        let x0 = r * 8;
        f.door_y(14, x0 + 3, x0 + 6);
    }
    f.probe_spacing = 4.0;
    f.build().expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portal_counts() {
        assert_eq!(two_room().portals.len(), 1);
        assert_eq!(three_room().portals.len(), 2);
        assert_eq!(courtyard().portals.len(), 3);
        assert_eq!(rooms_in_series(20).portals.len(), 19);
        assert_eq!(office(16).portals.len(), 16);
        assert!(corridor().portals.is_empty());
    }

    #[test]
    fn two_room_door_geometry() {
        let s = two_room();
        let p = &s.portals[0];
        assert!((p.area - 1.0).abs() < 1e-12);
        assert!((p.centroid - Vec3::new(10.25, 5.0, 0.25)).norm() < 1e-12);
        assert!(p.normal.x.abs() > 0.999);
    }

    #[test]
    fn courtyard_rooms_connect_only_through_doors() {
        let s = courtyard();
        let g = &s.grid;
        let a = Vec3::new(5.0, 5.0, 0.25);
        let b = Vec3::new(5.0, 25.0, 0.25);
        assert!(!g.segment_clear(a, b));
        assert!(g.is_open_point(Vec3::new(20.0, 10.0, 0.25)));
    }
}
