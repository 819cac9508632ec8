//! Run-time facade: scene, baked fields and dynamic portal states.

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::bake::BakedDataset;
use crate::error::{Error, Result};
use crate::fieldstore::{AcousticParams, FieldStore};
use crate::geom::Vector3;
use crate::occlusion::{
    net_alpha_of, occlude_initial, occlude_reflections, total_energy, OcclusionConfig, PortalStates,
};
use crate::portalsearch::{find_portals, SearchConfig, SearchResult};
use crate::scene::SceneDescription;

type Vec3 = Vector3<f64>;

/// Level reported for every output of an inaudible (no-path) query.
pub const SILENT_DB: f64 = -120.0;

/// Values shown by run-time debug overlays.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebugValues {
    /// Path length `c * tau0`, m.
    pub dist: f64,
    /// Initial loudness, dB.
    pub dry: f64,
    /// Total reflection loudness, dB.
    pub wet: f64,
    /// Direction the initial sound arrives from, at the listener.
    pub arrival: Vec3,
    /// Tightened path length through the last portal minus the direct
    /// path length, m.
    pub distance_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// Parameters after occlusion.
    pub params: AcousticParams,
    pub audible: bool,
    pub search: SearchResult,
    /// Net open fraction applied.
    pub alpha: f64,
    pub debug: DebugValues,
}

impl QueryResult {
    fn silent(search: SearchResult) -> Self {
        let params = AcousticParams {
            delay: 0.0,
            loudness_db: SILENT_DB,
            direction: Vec3::axis(2, false),
            reflections_db: [SILENT_DB; 6],
        };
        Self {
            debug: debug_values(&params, &search, 0.0),
            params,
            audible: false,
            search,
            alpha: 1.0,
        }
    }
}

fn debug_values(params: &AcousticParams, search: &SearchResult, c: f64) -> DebugValues {
    DebugValues {
        dist: c * params.delay,
        dry: params.loudness_db,
        wet: 10.0 * total_energy(&params.reflections_db).log10(),
        arrival: -params.direction,
        distance_diff: search
            .last_portal
            .and_then(|k| search.record(k))
            .map(|r| r.slack),
    }
}

pub struct Engine {
    scene: SceneDescription,
    store: FieldStore,
    search: SearchConfig,
    occlusion: OcclusionConfig,
    states: RwLock<PortalStates>,
}

impl Engine {
    /// Fails when the dataset was baked from a different scene.
    pub fn new(
        scene: SceneDescription,
        dataset: BakedDataset,
        search: SearchConfig,
        occlusion: OcclusionConfig,
    ) -> Result<Self> {
        if dataset.scene_hash != scene.content_hash() {
            return Err(Error::SceneHashMismatch);
        }
        if !(search.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} must be positive",
                search.epsilon
            )));
        }
        occlusion.validate()?;
        let states = RwLock::new(PortalStates::open(scene.portals.len()));
        Ok(Self {
            scene,
            store: FieldStore::new(dataset),
            search,
            occlusion,
            states,
        })
    }

    pub fn scene(&self) -> &SceneDescription {
        &self.scene
    }

    pub fn store(&self) -> &FieldStore {
        &self.store
    }

    pub fn search_config(&self) -> &SearchConfig {
        &self.search
    }

    pub fn occlusion_config(&self) -> &OcclusionConfig {
        &self.occlusion
    }

    pub fn set_portal_open_fraction(&self, id: usize, alpha: f64) -> Result<()> {
        self.states
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .set(id, alpha)
    }

    pub fn open_fraction(&self, id: usize) -> Option<f64> {
        self.snapshot().get(id)
    }

    /// Consistent copy of all open fractions.
    pub fn snapshot(&self) -> PortalStates {
        self.states
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn query(&self, source: Vec3, listener: Vec3) -> Result<QueryResult> {
        self.query_with(source, listener, &self.snapshot())
    }

    /// Query against explicit portal states.
    pub fn query_with(
        &self,
        source: Vec3,
        listener: Vec3,
        states: &PortalStates,
    ) -> Result<QueryResult> {
        let bounds = self.scene.grid.bounds();
        for p in [source, listener] {
            if !p.is_finite() || !bounds.contains(p) {
                return Err(Error::OutOfBounds(p.to_array()));
            }
        }
        let search = find_portals(
            &self.store,
            &self.scene.portals,
            source,
            listener,
            &self.search,
        );
        let Some(raw) = search.direct else {
            return Ok(QueryResult::silent(search));
        };
        let alpha = net_alpha_of(&search.portals, states, &self.occlusion);
        let kappa = search.last_portal.and_then(|k| self.scene.portal(k));
        let params = AcousticParams {
            loudness_db: occlude_initial(raw.loudness_db, alpha),
            reflections_db: occlude_reflections(
                &self.store,
                raw.reflections_db,
                kappa,
                source,
                listener,
                alpha,
                &self.occlusion,
            ),
            ..raw
        };
        let c = self.store.bake_config().speed_of_sound;
        Ok(QueryResult {
            debug: debug_values(&params, &search, c),
            params,
            audible: true,
            search,
            alpha,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bake::{bake_all, BakeConfig};
    use crate::fixtures;

    fn engine() -> Engine {
        let scene = fixtures::two_room();
        let ds = bake_all(&scene, &BakeConfig::default()).unwrap();
        Engine::new(
            scene,
            ds,
            SearchConfig::default(),
            OcclusionConfig::default(),
        )
        .unwrap()
    }

    fn at(x: f64, y: f64) -> Vec3 {
        Vec3::new(x, y, 0.25)
    }

    #[test]
    fn starts_open_and_rejects_stale_bake() {
        let e = engine();
        assert_eq!(e.snapshot().as_slice(), &[1.0]);
        let mut other = fixtures::two_room();
        other.grid.set_solid([0, 0, 0], true);
        let ds = bake_all(&fixtures::two_room(), &BakeConfig::default()).unwrap();
        let r = Engine::new(
            other,
            ds,
            SearchConfig::default(),
            OcclusionConfig::default(),
        );
        assert!(matches!(r, Err(Error::SceneHashMismatch)));
    }

    #[test]
    fn open_portals_are_identity() {
        let e = engine();
        let (s, l) = (at(3.0, 2.0), at(16.0, 8.0));
        let q = e.query(s, l).unwrap();
        assert_eq!(q.search.portals, vec![1]);
        assert_eq!(q.params, e.store().lookup(s, l).unwrap());
        assert_eq!(q.alpha, 1.0);
    }

    #[test]
    fn half_open_door_drops_three_db() {
        let e = engine();
        let (s, l) = (at(3.0, 2.0), at(16.0, 8.0));
        let open = e.query(s, l).unwrap();
        e.set_portal_open_fraction(1, 0.5).unwrap();
        let half = e.query(s, l).unwrap();
        assert!((open.debug.dry - half.debug.dry - 3.0103).abs() < 1e-4);
        assert!(half.debug.wet <= open.debug.wet);
        e.set_portal_open_fraction(1, 0.0).unwrap();
        let shut = e.query(s, l).unwrap();
        assert!((open.debug.dry - shut.debug.dry - 30.0).abs() < 1e-9);
        assert!(e.set_portal_open_fraction(1, 1.5).is_err());
        assert!(e.set_portal_open_fraction(2, 0.5).is_err());
    }

    #[test]
    fn debug_values_follow_params() {
        let e = engine();
        let q = e.query(at(3.0, 2.0), at(16.0, 8.0)).unwrap();
        assert_eq!(q.debug.dist, 340.0 * q.params.delay);
        assert_eq!(q.debug.arrival, -q.params.direction);
        assert_eq!(
            q.debug.distance_diff,
            Some(q.search.record(1).unwrap().slack)
        );
    }

    #[test]
    fn out_of_bounds_and_no_path() {
        let e = engine();
        assert!(matches!(
            e.query(at(-1.0, 2.0), at(3.0, 3.0)),
            Err(Error::OutOfBounds(_))
        ));
        // Inside the wall: no probe or emitter can see it.
        let q = e.query(at(10.25, 1.0), at(3.0, 3.0)).unwrap();
        assert!(!q.audible);
        assert_eq!(q.params.loudness_db, SILENT_DB);
    }

    #[test]
    fn repeatable() {
        let e = engine();
        e.set_portal_open_fraction(1, 0.3).unwrap();
        let a = e.query(at(3.0, 2.0), at(16.0, 8.0)).unwrap();
        let b = e.query(at(3.0, 2.0), at(16.0, 8.0)).unwrap();
        assert_eq!(a, b);
    }
}
