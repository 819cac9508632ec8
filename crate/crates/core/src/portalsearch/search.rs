use serde::{Deserialize, Serialize};

use crate::bake::INITIAL_WINDOW;
use crate::fieldstore::{AcousticField, AcousticParams, LookupError};
use crate::geom::Vector3;
use crate::scene::Portal;

use super::cull::{cull_bbox, cull_ellipsoid, CullMargin, CullVolume};
use super::tighten::{pierce_test_with, string_tighten_with, Tightened};

type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Delay tolerance of the acceptance criterion, s.
    pub epsilon: f64,
    pub margin: CullMargin,
    /// Disable to evaluate every portal fully.
    pub culling: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            epsilon: INITIAL_WINDOW,
            margin: CullMargin::Conservative,
            culling: true,
        }
    }
}

/// Work counters for one search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub portals_tested: usize,
    pub culled_bbox: usize,
    pub culled_ellipsoid: usize,
    /// Portals that reached the lookup stage.
    pub full_evaluations: usize,
    /// Portals skipped because a centroid lookup found no path.
    pub unreachable: usize,
    pub lookups: usize,
}

/// Full evaluation of one portal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortalRecord {
    pub id: usize,
    pub apparent_source: Vec3,
    pub apparent_listener: Vec3,
    pub pierce_point: Vec3,
    pub corrected_length: f64,
    /// `corrected_length` minus the direct path length, m.
    pub slack: f64,
    pub pierces: bool,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Direct lookup for the pair; `None` when no path exists.
    pub direct: Option<AcousticParams>,
    /// `c * tau0(source, listener)`; `None` without a path.
    pub path_length: Option<f64>,
    /// Accepted portal ids, ascending.
    pub portals: Vec<usize>,
    /// Accepted portal nearest the listener.
    pub last_portal: Option<usize>,
    /// Every portal that reached the lookup stage, in evaluation order.
    pub records: Vec<PortalRecord>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn record(&self, id: usize) -> Option<&PortalRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn contains(&self, id: usize) -> bool {
        self.portals.binary_search(&id).is_ok()
    }
}

/// Tightens the path through `portal` using two centroid lookups.
pub fn string_tighten<F: AcousticField + ?Sized>(
    field: &F,
    portal: &Portal,
    source: Vec3,
    listener: Vec3,
) -> Result<Tightened<f64>, LookupError> {
    let a = field.lookup_at_portal(source, portal)?;
    let b = field.lookup_at_portal(listener, portal)?;
    Ok(string_tighten_with(
        portal,
        (a.delay, a.direction),
        (b.delay, b.direction),
        field.speed_of_sound(),
    ))
}

/// Whether the wavefronts from `source` and `listener` reach the portal
/// centroid from opposite sides. A missing path fails the test.
pub fn pierce_test<F: AcousticField + ?Sized>(
    field: &F,
    portal: &Portal,
    source: Vec3,
    listener: Vec3,
) -> bool {
    match (
        field.lookup_at_portal(source, portal),
        field.lookup_at_portal(listener, portal),
    ) {
        (Ok(a), Ok(b)) => pierce_test_with(portal, a.direction, b.direction),
        _ => false,
    }
}

/// Finds the portals on the initial sound path from `source` to `listener`.
pub fn find_portals<F: AcousticField + ?Sized>(
    field: &F,
    portals: &[Portal],
    source: Vec3,
    listener: Vec3,
    cfg: &SearchConfig,
) -> SearchResult {
    let mut stats = SearchStats {
        lookups: 1,
        ..SearchStats::default()
    };
    let direct = field.lookup(source, listener).ok();
    let Some(direct_params) = direct else {
        return SearchResult {
            direct: None,
            path_length: None,
            portals: Vec::new(),
            last_portal: None,
            records: Vec::new(),
            stats,
        };
    };
    let c = field.speed_of_sound();
    let path_length = c * direct_params.delay;
    let budget = path_length + c * cfg.epsilon;
    let vol = CullVolume::new(source, listener, budget, c * field.delay_quantum());

    let mut records = Vec::new();
    let mut ends: Option<(F::Endpoint, F::Endpoint)> = None;
    let mut ends_failed = false;
    for portal in portals {
        stats.portals_tested += 1;
        if cfg.culling {
            if !cull_bbox(portal, &vol, cfg.margin) {
                stats.culled_bbox += 1;
                continue;
            }
            if !cull_ellipsoid(portal, &vol, cfg.margin) {
                stats.culled_ellipsoid += 1;
                continue;
            }
        }
        stats.full_evaluations += 1;
        if ends.is_none() && !ends_failed {
            match (field.endpoint(source), field.endpoint(listener)) {
                (Ok(a), Ok(b)) => ends = Some((a, b)),
                _ => ends_failed = true,
            }
        }
        stats.lookups += 1;
        let Some((src_end, lst_end)) = &ends else {
            stats.unreachable += 1;
            continue;
        };
        let Ok(from_source) = field.lookup_at_portal_from(src_end, portal) else {
            stats.unreachable += 1;
            continue;
        };
        stats.lookups += 1;
        let Ok(from_listener) = field.lookup_at_portal_from(lst_end, portal) else {
            stats.unreachable += 1;
            continue;
        };
        let pierces = pierce_test_with(portal, from_source.direction, from_listener.direction);
        let t = string_tighten_with(
            portal,
            (from_source.delay, from_source.direction),
            (from_listener.delay, from_listener.direction),
            c,
        );
        records.push(PortalRecord {
            id: portal.id,
            apparent_source: t.apparent_source,
            apparent_listener: t.apparent_listener,
            pierce_point: t.pierce_point,
            corrected_length: t.corrected_length,
            slack: t.corrected_length - path_length,
            pierces,
            accepted: pierces && t.corrected_length <= budget,
        });
    }

    let mut accepted: Vec<&PortalRecord> = records.iter().filter(|r| r.accepted).collect();
    accepted.sort_by_key(|r| r.id);
    let last_portal = accepted
        .iter()
        .map(|r| (r.apparent_listener.distance(r.pierce_point), r.id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id);
    SearchResult {
        direct,
        path_length: Some(path_length),
        portals: accepted.iter().map(|r| r.id).collect(),
        last_portal,
        records,
        stats,
    }
}
