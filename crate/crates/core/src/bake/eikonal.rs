//! First-arrival geodesic distance over the voxel grid.
//!
//! Wavefront expansion in Dijkstra order over 8/26-connected open cells,
//! where each cell inherits the *anchor* (last diffraction point) of its
//! parent whenever the anchor is still visible. Distances are therefore
//! straight-line in free field and bend only at occluding corners, which
//! removes the metric bias of plain grid search.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::geom::Vector3;
use crate::scene::SceneGrid;

type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug)]
pub struct SolverParams {
    /// Cells farther than this geodesic distance are left unreached.
    pub max_distance: f64,
    /// Path bends sharper than this count as a diffraction event.
    pub bend_threshold_deg: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_distance: f64::INFINITY,
            bend_threshold_deg: 30.0,
        }
    }
}

/// Unquantized per-cell solution for one probe (simulation source).
#[derive(Clone, Debug)]
pub struct ProbeSolution {
    pub probe: Vec3,
    /// Geodesic distance in meters; `f64::INFINITY` where unreachable.
    pub distance: Vec<f64>,
    /// Wavefront propagation direction at the cell (away from the probe).
    pub propagation: Vec<Vec3>,
    /// Arrival direction at the probe of a wave emitted from the cell.
    pub arrival: Vec<Vec3>,
    /// Bends sharper than the threshold along the path.
    pub events: Vec<u16>,
    /// The straight segment from the probe reaches the cell unobstructed.
    pub line_of_sight: Vec<bool>,
}

impl ProbeSolution {
    pub fn is_reachable(&self, idx: usize) -> bool {
        self.distance[idx].is_finite()
    }
}

const FALLBACK_DIR: Vec3 = Vec3::new(0.0, 0.0, 1.0);

pub fn solve_probe(grid: &SceneGrid, probe: Vec3, params: &SolverParams) -> Result<ProbeSolution> {
    let start = grid
        .cell_of(probe)
        .filter(|c| !grid.is_solid_index(grid.index(*c)))
        .ok_or(Error::PointNotOpen(probe.to_array()))?;
    let n = grid.len();
    let dims = grid.dims();
    let offsets = grid.neighbor_offsets();
    let cos_bend = params.bend_threshold_deg.to_radians().cos();

    let mut g = vec![f64::INFINITY; n];
    let mut anchor = vec![probe; n];
    let mut anchor_g = vec![0.0f64; n];
    let mut events = vec![0u16; n];
    let mut first_hop = vec![probe; n];
    let mut los = vec![false; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();

    let s = grid.index(start);
    g[s] = grid.center_of_index(s).distance(probe);
    los[s] = true;
    heap.push((Reverse(OrderedFloat(g[s])), Reverse(s)));

    while let Some((Reverse(OrderedFloat(gu)), Reverse(u))) = heap.pop() {
        if closed[u] || gu > g[u] {
            continue;
        }
        closed[u] = true;
        let cu = grid.center_of_index(u);
        let cc = grid.coords(u);
        for off in &offsets {
            let nc = [
                cc[0] as i64 + off[0],
                cc[1] as i64 + off[1],
                cc[2] as i64 + off[2],
            ];
            if (0..3).any(|a| nc[a] < 0 || nc[a] as usize >= dims[a]) {
                continue;
            }
            let v = grid.index([nc[0] as usize, nc[1] as usize, nc[2] as usize]);
            if closed[v] || grid.is_solid_index(v) {
                continue;
            }
            let cv = grid.center_of_index(v);

            // Straight continuation from u's anchor.
            let via_anchor = anchor_g[u] + cv.distance(anchor[u]);
            if via_anchor < g[v] - 1e-12 && grid.segment_clear(anchor[u], cv) {
                if via_anchor <= params.max_distance {
                    g[v] = via_anchor;
                    anchor[v] = anchor[u];
                    anchor_g[v] = anchor_g[u];
                    events[v] = events[u];
                    first_hop[v] = first_hop[u];
                    los[v] = los[u];
                    heap.push((Reverse(OrderedFloat(via_anchor)), Reverse(v)));
                }
                continue;
            }

            // Bend at u.
            let via_u = gu + cv.distance(cu);
            if via_u < g[v] - 1e-12 && via_u <= params.max_distance && grid.segment_clear(cu, cv) {
                let incoming = cu - anchor[u];
                let outgoing = cv - cu;
                let bend = match (incoming.try_normalize(1e-12), outgoing.try_normalize(1e-12)) {
                    (Some(a), Some(b)) => a.dot(b) < cos_bend,
                    _ => false,
                };
                g[v] = via_u;
                anchor[v] = cu;
                anchor_g[v] = gu;
                events[v] = events[u].saturating_add(bend as u16);
                first_hop[v] = if los[u] { cu } else { first_hop[u] };
                los[v] = false;
                heap.push((Reverse(OrderedFloat(via_u)), Reverse(v)));
            }
        }
    }

    let mut propagation = vec![FALLBACK_DIR; n];
    let mut arrival = vec![-FALLBACK_DIR; n];
    for i in 0..n {
        if !g[i].is_finite() {
            los[i] = false;
            continue;
        }
        let c = grid.center_of_index(i);
        if let Some(d) = (c - anchor[i]).try_normalize(1e-12) {
            propagation[i] = d;
        }
        let hop = if los[i] { c } else { first_hop[i] };
        if let Some(d) = (probe - hop).try_normalize(1e-12) {
            arrival[i] = d;
        } else {
            arrival[i] = -propagation[i];
        }
    }

    Ok(ProbeSolution {
        probe,
        distance: g,
        propagation,
        arrival,
        events,
        line_of_sight: los,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn free_field_is_euclidean() {
        let grid = SceneGrid::open(Vec3::zero(), 0.5, [80, 40, 1]).unwrap();
        let p = v(3.1, 4.3, 0.25);
        let sol = solve_probe(&grid, p, &SolverParams::default()).unwrap();
        for i in 0..grid.len() {
            let c = grid.center_of_index(i);
            assert!((sol.distance[i] - c.distance(p)).abs() < 1e-9, "cell {i}");
            assert!(sol.line_of_sight[i]);
            assert_eq!(sol.events[i], 0);
            if c.distance(p) > 1e-6 {
                assert!((sol.propagation[i] - (c - p).normalize()).norm() < 1e-9);
                assert!((sol.arrival[i] + sol.propagation[i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn wall_forces_bend_and_event() {
        let mut grid = SceneGrid::open(Vec3::zero(), 0.5, [40, 20, 1]).unwrap();
        grid.fill_box(v(10.0, 0.0, 0.0), v(10.5, 10.0, 0.5), true);
        grid.fill_box(v(10.0, 4.0, 0.0), v(10.5, 6.0, 0.5), false);
        let p = v(5.25, 1.25, 0.25);
        let sol = solve_probe(&grid, p, &SolverParams::default()).unwrap();
        let target = grid.index(grid.cell_of(v(15.25, 1.25, 0.25)).unwrap());
        let straight = grid.center_of_index(target).distance(p);
        assert!(sol.distance[target] > straight + 1.0);
        assert!(!sol.line_of_sight[target]);
        assert!(sol.events[target] >= 1);
        // The wave leaves the probe toward the doorway (+y, +x).
        let a = -sol.arrival[target];
        assert!(a.x > 0.0 && a.y > 0.0);
    }

    #[test]
    fn sealed_room_unreachable() {
        let mut grid = SceneGrid::open(Vec3::zero(), 1.0, [10, 10, 1]).unwrap();
        grid.fill_box(v(5.0, 0.0, 0.0), v(6.0, 10.0, 1.0), true);
        let sol = solve_probe(&grid, v(1.5, 1.5, 0.5), &SolverParams::default()).unwrap();
        let idx = grid.index([8, 8, 0]);
        assert!(!sol.is_reachable(idx));
    }

    #[test]
    fn probe_in_solid_is_error() {
        let mut grid = SceneGrid::open(Vec3::zero(), 1.0, [4, 4, 1]).unwrap();
        grid.set_solid([1, 1, 0], true);
        assert!(solve_probe(&grid, v(1.5, 1.5, 0.5), &SolverParams::default()).is_err());
    }

    #[test]
    fn max_distance_truncates() {
        let grid = SceneGrid::open(Vec3::zero(), 1.0, [30, 3, 1]).unwrap();
        let params = SolverParams {
            max_distance: 10.0,
            ..Default::default()
        };
        let sol = solve_probe(&grid, v(0.5, 1.5, 0.5), &params).unwrap();
        assert!(sol.is_reachable(grid.index([10, 1, 0])));
        assert!(!sol.is_reachable(grid.index([11, 1, 0])));
    }
}
