//! Brute-force reference: grid shortest paths and the portals they pierce.
//!
//! Independent of the bake and the portal search. Slow by design.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vector3;
use crate::portalsearch::SearchResult;
use crate::scene::{Portal, SceneDescription, SceneGrid};

type Vec3 = Vector3<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct OraclePath {
    /// `a`, the centers of the cells between the end cells, then `b`.
    pub waypoints: Vec<Vec3>,
    /// Sum of waypoint segment lengths, m.
    pub length: f64,
    /// Length after pulling the path taut around corners, m.
    pub taut_length: f64,
    /// Pierced portal ids in order from `a` to `b`.
    pub pierced: Vec<usize>,
}

/// Subdivides every cell of `scene` into `factor` cells per active axis.
pub fn refine(scene: &SceneDescription, factor: usize) -> Result<SceneDescription> {
    let factor = factor.max(1);
    if factor == 1 {
        return Ok(scene.clone());
    }
    let g = &scene.grid;
    let d = g.dims();
    let f = [factor, factor, if d[2] > 1 { factor } else { 1 }];
    let dims = [d[0] * f[0], d[1] * f[1], d[2] * f[2]];
    let mut solid = vec![false; dims.iter().product()];
    for (i, s) in solid.iter_mut().enumerate() {
        let x = i % dims[0];
        let r = i / dims[0];
        let (y, z) = (r % dims[1], r / dims[1]);
        *s = g.is_solid_index(g.index([x / f[0], y / f[1], z / f[2]]));
    }
    // Keep the layer height of single-layer grids.
    let cs = g.cell_size() / factor as f64;
    let mut origin = g.origin();
    if d[2] == 1 {
        origin.z += (g.cell_size() - cs) / 2.0;
    }
    // Portals are kept as authored; a thinner layer may not cover their
    // full height.
    Ok(SceneDescription {
        grid: SceneGrid::new(origin, cs, dims, solid)?,
        ..scene.clone()
    })
}

/// Neighbor moves that do not cut past a solid cell: every cell in the box
/// spanned by the move must be open.
fn moves(grid: &SceneGrid) -> Vec<([i64; 3], f64, Vec<[i64; 3]>)> {
    let cs = grid.cell_size();
    grid.neighbor_offsets()
        .into_iter()
        .map(|o| {
            let len = cs * ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt();
            let mut corners = Vec::new();
            for sx in [0, o[0]] {
                for sy in [0, o[1]] {
                    for sz in [0, o[2]] {
                        let s = [sx, sy, sz];
                        if s != [0, 0, 0] && s != o && !corners.contains(&s) {
                            corners.push(s);
                        }
                    }
                }
            }
            (o, len, corners)
        })
        .collect()
}

fn add(c: [usize; 3], o: [i64; 3]) -> [i64; 3] {
    [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]]
}

fn to_cell(c: [i64; 3]) -> [usize; 3] {
    c.map(|v| v as usize)
}

/// Dijkstra from the cell of `a` to the cell of `b`; ties pop the lower
/// cell index first. `Ok(None)` when disconnected.
pub fn shortest_path(scene: &SceneDescription, a: Vec3, b: Vec3) -> Result<Option<OraclePath>> {
    let grid = &scene.grid;
    // A single layer is a plan view: locate endpoints by x and y only.
    let layer_z = (grid.dims()[2] == 1).then(|| grid.cell_center([0, 0, 0]).z);
    let open_cell = |p: Vec3| {
        let q = layer_z.map_or(p, |z| Vec3::new(p.x, p.y, z));
        grid.cell_of(q)
            .filter(|c| !grid.is_solid_index(grid.index(*c)))
            .ok_or(Error::PointNotOpen(p.to_array()))
    };
    let start = grid.index(open_cell(a)?);
    let goal = grid.index(open_cell(b)?);
    let n = grid.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    let moves = moves(grid);
    dist[start] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), start)));
    while let Some(Reverse((OrderedFloat(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == goal {
            break;
        }
        let cu = grid.coords(u);
        for (o, len, corners) in &moves {
            let nc = add(cu, *o);
            if grid.is_blocked(nc) || corners.iter().any(|s| grid.is_blocked(add(cu, *s))) {
                continue;
            }
            let v = grid.index(to_cell(nc));
            let nd = d + len;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(Reverse((OrderedFloat(nd), v)));
            }
        }
    }
    if !dist[goal].is_finite() {
        return Ok(None);
    }
    let mut cells = vec![goal];
    while let Some(&last) = cells.last() {
        if last == start {
            break;
        }
        cells.push(prev[last]);
    }
    cells.reverse();
    let mut waypoints = Vec::with_capacity(cells.len() + 2);
    waypoints.push(a);
    if cells.len() > 2 {
        waypoints.extend(
            cells[1..cells.len() - 1]
                .iter()
                .map(|&c| grid.center_of_index(c)),
        );
    }
    waypoints.push(b);
    let length = polyline_length(&waypoints);
    let taut_length = polyline_length(&pull_taut(grid, &waypoints));
    let pierced = pierced_portals(&scene.portals, &waypoints, grid.cell_size() / 2.0);
    Ok(Some(OraclePath {
        waypoints,
        length,
        taut_length,
        pierced,
    }))
}

pub fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Greedy string pulling: from each kept point, jump to the farthest
/// following waypoint that is still in line of sight.
pub fn pull_taut(grid: &SceneGrid, points: &[Vec3]) -> Vec<Vec3> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut out = vec![points[0]];
    let mut i = 0;
    while i + 1 < points.len() {
        let mut j = i + 1;
        for k in (i + 2..points.len()).rev() {
            if grid.segment_clear(points[i], points[k]) {
                j = k;
                break;
            }
        }
        out.push(points[j]);
        i = j;
    }
    out
}

/// Portals crossed an odd number of times by the polyline, within the
/// polygon grown by `slack`; ordered by first crossing.
pub fn pierced_portals(portals: &[Portal], points: &[Vec3], slack: f64) -> Vec<usize> {
    let mut hits: Vec<(usize, usize, f64)> = Vec::new();
    for p in portals {
        let mut count = 0usize;
        let mut first = None;
        for (s, w) in points.windows(2).enumerate() {
            let (da, db) = (p.plane_distance(w[0]), p.plane_distance(w[1]));
            // Points on the plane count as the positive side.
            if (da < 0.0) == (db < 0.0) {
                continue;
            }
            let t = if db == 0.0 { 1.0 } else { da / (da - db) };
            let x = w[0] + (w[1] - w[0]) * t;
            if p.contains_projected(x, slack) {
                count += 1;
                first.get_or_insert((s, t));
            }
        }
        if count % 2 == 1 {
            let (s, t) = first.unwrap_or((0, 0.0));
            hits.push((p.id, s, t));
        }
    }
    hits.sort_by(|a, b| a.1.cmp(&b.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)));
    hits.into_iter().map(|h| h.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Agree,
    /// Every mismatched portal's slack is within one cell diagonal of the
    /// acceptance threshold.
    Boundary,
    Hard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub class: Agreement,
    /// Accepted by the search but not pierced by the oracle path.
    pub extra: Vec<usize>,
    /// Pierced by the oracle path but not accepted.
    pub missing: Vec<usize>,
}

/// Compares accepted portals against the oracle's pierced set.
pub fn compare(
    search: &SearchResult,
    path: &OraclePath,
    c_epsilon: f64,
    cell_diagonal: f64,
) -> Comparison {
    let extra: Vec<usize> = search
        .portals
        .iter()
        .copied()
        .filter(|k| !path.pierced.contains(k))
        .collect();
    let mut missing: Vec<usize> = path
        .pierced
        .iter()
        .copied()
        .filter(|k| !search.contains(*k))
        .collect();
    missing.sort_unstable();
    let near_threshold = |k: &usize| {
        search
            .record(*k)
            .is_some_and(|r| (r.slack - c_epsilon).abs() <= cell_diagonal)
    };
    let class = if extra.is_empty() && missing.is_empty() {
        Agreement::Agree
    } else if extra.iter().chain(&missing).all(near_threshold) {
        Agreement::Boundary
    } else {
        Agreement::Hard
    };
    Comparison {
        class,
        extra,
        missing,
    }
}
