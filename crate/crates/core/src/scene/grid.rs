//! Voxel occupancy grid with world-space transform and line-of-sight queries.

use crate::error::{Error, Result};
use crate::geom::{Aabb, Vector3};

type Vec3 = Vector3<f64>;

/// Uniform voxel grid. A grid with `dims[2] == 1` is a single-layer (2D) scene.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneGrid {
    origin: Vec3,
    cell_size: f64,
    dims: [usize; 3],
    solid: Vec<bool>,
}

impl SceneGrid {
    pub fn new(origin: Vec3, cell_size: f64, dims: [usize; 3], solid: Vec<bool>) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "cell_size must be > 0, got {cell_size}"
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidGrid(format!(
                "all dims must be >= 1, got {dims:?}"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let n = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::InvalidGrid("grid too large".into()))?;
        if solid.len() != n {
            return Err(Error::InvalidGrid(format!(
                "occupancy has {} cells, dims imply {n}",
                solid.len()
            )));
        }
        Ok(Self {
            origin,
            cell_size,
            dims,
            solid,
        })
    }

    /// A grid with every cell open.
    pub fn open(origin: Vec3, cell_size: f64, dims: [usize; 3]) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(origin, cell_size, dims, vec![false; n])
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.solid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solid.is_empty()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.solid
    }

    /// Number of axes with more than one cell.
    pub fn active_axes(&self) -> usize {
        self.dims.iter().filter(|&&d| d > 1).count().max(1)
    }

    /// Length of a cell diagonal over the active axes.
    pub fn cell_diagonal(&self) -> f64 {
        self.cell_size * (self.active_axes() as f64).sqrt()
    }

    pub fn bounds(&self) -> Aabb<f64> {
        let ext = Vec3::new(
            self.dims[0] as f64,
            self.dims[1] as f64,
            self.dims[2] as f64,
        ) * self.cell_size;
        Aabb::new(self.origin, self.origin + ext)
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let x = idx % self.dims[0];
        let r = idx / self.dims[0];
        [x, r % self.dims[1], r / self.dims[1]]
    }

    #[inline]
    pub fn cell_center(&self, c: [usize; 3]) -> Vec3 {
        self.origin
            + Vec3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5) * self.cell_size
    }

    #[inline]
    pub fn center_of_index(&self, idx: usize) -> Vec3 {
        self.cell_center(self.coords(idx))
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_of(&self, p: Vec3) -> Option<[usize; 3]> {
        let g = (p - self.origin) / self.cell_size;
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = g[a].floor();
            if !(f >= 0.0) {
                return None;
            }
            // Points exactly on the far face belong to the last cell.
            let i = if f as usize == self.dims[a] && g[a] == f {
                self.dims[a] - 1
            } else {
                f as usize
            };
            if i >= self.dims[a] {
                return None;
            }
            out[a] = i;
        }
        Some(out)
    }

    #[inline]
    pub fn is_solid_index(&self, idx: usize) -> bool {
        self.solid[idx]
    }

    /// Solid or out of bounds.
    pub fn is_blocked(&self, c: [i64; 3]) -> bool {
        if c.iter()
            .zip(&self.dims)
            .any(|(&i, &d)| i < 0 || i as usize >= d)
        {
            return true;
        }
        self.solid[self.index([c[0] as usize, c[1] as usize, c[2] as usize])]
    }

    pub fn is_open_point(&self, p: Vec3) -> bool {
        self.cell_of(p).is_some_and(|c| !self.solid[self.index(c)])
    }

    pub fn set_solid(&mut self, c: [usize; 3], solid: bool) {
        let i = self.index(c);
        self.solid[i] = solid;
    }

    /// Marks every cell whose center lies in the world-space box `[lo, hi]`.
    pub fn fill_box(&mut self, lo: Vec3, hi: Vec3, solid: bool) {
        for idx in 0..self.solid.len() {
            let c = self.center_of_index(idx);
            if c.x >= lo.x
                && c.x <= hi.x
                && c.y >= lo.y
                && c.y <= hi.y
                && c.z >= lo.z
                && c.z <= hi.z
            {
                self.solid[idx] = solid;
            }
        }
    }

    pub fn open_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.solid.len()).filter(|&i| !self.solid[i])
    }

    /// Neighbor offsets for the grid's connectivity: 26 in 3D, 8 for single-layer grids.
    pub fn neighbor_offsets(&self) -> Vec<[i64; 3]> {
        let zr: &[i64] = if self.dims[2] > 1 { &[-1, 0, 1] } else { &[0] };
        let mut out = Vec::with_capacity(26);
        for &dz in zr {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if dx != 0 || dy != 0 || dz != 0 {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }

    /// True when the segment `a`-`b` only passes through open cells.
    ///
    /// Cells touched only along an edge or at a corner count as traversed, so
    /// the test is symmetric in its endpoints and forbids squeezing between
    /// diagonally adjacent solid cells.
    pub fn segment_clear(&self, a: Vec3, b: Vec3) -> bool {
        let ga = (a - self.origin) / self.cell_size;
        let gb = (b - self.origin) / self.cell_size;
        let (Some(start), Some(end)) = (self.cell_of(a), self.cell_of(b)) else {
            return false;
        };
        let mut cell = [start[0] as i64, start[1] as i64, start[2] as i64];
        let end = [end[0] as i64, end[1] as i64, end[2] as i64];
        if self.is_blocked(cell) {
            return false;
        }
        let d = gb - ga;
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for ax in 0..3 {
            if cell[ax] == end[ax] {
                continue;
            }
            if d[ax] > 0.0 {
                step[ax] = 1;
                t_max[ax] = ((cell[ax] + 1) as f64 - ga[ax]) / d[ax];
                t_delta[ax] = 1.0 / d[ax];
            } else if d[ax] < 0.0 {
                step[ax] = -1;
                t_max[ax] = (cell[ax] as f64 - ga[ax]) / d[ax];
                t_delta[ax] = -1.0 / d[ax];
            }
        }
        let budget = (0..3).map(|ax| (end[ax] - cell[ax]).abs()).sum::<i64>() + 3;
        for _ in 0..budget {
            if cell == end {
                return true;
            }
            let mut t_min = f64::INFINITY;
            for ax in 0..3 {
                if step[ax] != 0 && cell[ax] != end[ax] {
                    t_min = t_min.min(t_max[ax]);
                }
            }
            if !t_min.is_finite() {
                return cell == end;
            }
            let tol = 1e-9;
            let mut tied = [false; 3];
            let mut n_tied = 0;
            for ax in 0..3 {
                if step[ax] != 0 && cell[ax] != end[ax] && t_max[ax] <= t_min + tol {
                    tied[ax] = true;
                    n_tied += 1;
                }
            }
            if n_tied > 1 {
                // Visit every cell touched at the shared edge / corner.
                for mask in 1u8..(1 << 3) {
                    let mut ok = true;
                    let mut c = cell;
                    let mut count = 0;
                    for ax in 0..3 {
                        if mask & (1 << ax) != 0 {
                            if !tied[ax] {
                                ok = false;
                                break;
                            }
                            c[ax] += step[ax];
                            count += 1;
                        }
                    }
                    if ok && count < n_tied && self.is_blocked(c) {
                        return false;
                    }
                }
            }
            for ax in 0..3 {
                if tied[ax] {
                    cell[ax] += step[ax];
                    t_max[ax] += t_delta[ax];
                }
            }
            if self.is_blocked(cell) {
                return false;
            }
        }
        cell == end
    }
}
