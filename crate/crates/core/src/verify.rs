//! Random-pair agreement between the portal search and the oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::Result;
use crate::geom::Vector3;
use crate::oracle::{compare, refine, shortest_path, Agreement, Comparison};
use crate::scene::SceneDescription;

type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub pairs: usize,
    pub seed: u64,
    /// Endpoints closer than this to a portal polygon are redrawn, m.
    pub portal_clearance: f64,
    /// Oracle grid subdivision.
    pub refinement: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            pairs: 500,
            seed: 0,
            portal_clearance: 0.0,
            refinement: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub source: Vec3,
    pub listener: Vec3,
    pub found: Vec<usize>,
    pub pierced: Vec<usize>,
    pub comparison: Comparison,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pairs: usize,
    pub agree: usize,
    pub boundary: usize,
    pub hard: usize,
    /// Pairs skipped because the oracle found no path.
    pub disconnected: usize,
    pub disagreements: Vec<Disagreement>,
}

impl VerifyReport {
    pub fn agreement_rate(&self) -> f64 {
        let n = self.agree + self.boundary + self.hard;
        if n == 0 {
            1.0
        } else {
            self.agree as f64 / n as f64
        }
    }

    /// At least 95% agreement and no hard failures.
    pub fn passed(&self) -> bool {
        self.hard == 0 && self.agreement_rate() >= 0.95
    }
}

/// Uniform open point at least `clearance` away from every portal polygon.
pub fn random_open_point(scene: &SceneDescription, rng: &mut impl Rng, clearance: f64) -> Vec3 {
    let b = scene.grid.bounds();
    loop {
        let p = Vec3::new(
            rng.random_range(b.min.x..b.max.x),
            rng.random_range(b.min.y..b.max.y),
            rng.random_range(b.min.z..b.max.z),
        );
        if !scene.grid.is_open_point(p) {
            continue;
        }
        let clear = clearance <= 0.0
            || scene
                .portals
                .iter()
                .all(|k| k.closest_point(p, p).distance(p) >= clearance);
        if clear {
            return p;
        }
    }
}

/// Runs `cfg.pairs` random queries against the oracle.
pub fn verify(engine: &Engine, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let scene = engine.scene();
    let oracle_scene = refine(scene, cfg.refinement)?;
    let c_eps = engine.store().bake_config().speed_of_sound * engine.search_config().epsilon;
    let diag = scene.grid.cell_diagonal();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = VerifyReport {
        pairs: cfg.pairs,
        ..VerifyReport::default()
    };
    for _ in 0..cfg.pairs {
        let source = random_open_point(scene, &mut rng, cfg.portal_clearance);
        let listener = random_open_point(scene, &mut rng, cfg.portal_clearance);
        let Some(path) = shortest_path(&oracle_scene, source, listener)? else {
            report.disconnected += 1;
            continue;
        };
        let q = engine.query(source, listener)?;
        let cmp = compare(&q.search, &path, c_eps, diag);
        match cmp.class {
            Agreement::Agree => report.agree += 1,
            Agreement::Boundary => report.boundary += 1,
            Agreement::Hard => report.hard += 1,
        }
        if cmp.class != Agreement::Agree {
            report.disagreements.push(Disagreement {
                source,
                listener,
                found: q.search.portals.clone(),
                pierced: path.pierced.clone(),
                comparison: cmp,
            });
        }
    }
    Ok(report)
}
