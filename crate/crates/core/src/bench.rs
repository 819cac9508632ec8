//! Scaling measurements on synthetic office floors.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bake::{bake_all, BakeConfig};
use crate::error::Result;
use crate::fieldstore::FieldStore;
use crate::fixtures;
use crate::geom::Vector3;
use crate::oracle::shortest_path;
use crate::portalsearch::{find_portals, SearchConfig};
use crate::scene::SceneDescription;
use crate::verify::random_open_point;

type Vec3 = Vector3<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub doors: Vec<usize>,
    pub queries: usize,
    pub seed: u64,
    /// Bake simulation radius, m.
    pub max_distance: f64,
    /// Listener distance from the source for local queries, m.
    pub local_radius: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            doors: vec![16, 64, 256],
            queries: 200,
            seed: 0,
            max_distance: 40.0,
            local_radius: 8.0,
        }
    }
}

/// Mean per-query measurements for one scene size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub doors: usize,
    pub probes: usize,
    pub queries: usize,
    pub bake_seconds: f64,
    /// Acoustic lookups with culling disabled.
    pub lookups_uncull: f64,
    /// Acoustic lookups with culling.
    pub lookups: f64,
    pub full_evaluations: f64,
    /// `doors` over mean full evaluations with culling.
    pub cull_reduction: f64,
    /// Mean fraction of portals whose centroid is within `local_radius` of
    /// either endpoint.
    pub near_fraction: f64,
    pub search_micros: f64,
    pub oracle_micros: f64,
    /// Oracle time over search time.
    pub speedup: f64,
}

fn local_pair(scene: &SceneDescription, rng: &mut ChaCha8Rng, radius: f64) -> (Vec3, Vec3) {
    let source = random_open_point(scene, rng, 0.0);
    let b = scene.grid.bounds();
    loop {
        let l = Vec3::new(
            rng.random_range((source.x - radius).max(b.min.x)..(source.x + radius).min(b.max.x)),
            rng.random_range((source.y - radius).max(b.min.y)..(source.y + radius).min(b.max.y)),
            source.z,
        );
        if l.distance(source) <= radius && scene.grid.is_open_point(l) {
            return (source, l);
        }
    }
}

/// Measures one scene.
pub fn bench_scene(scene: &SceneDescription, cfg: &BenchConfig) -> Result<BenchRow> {
    let bake_cfg = BakeConfig {
        max_distance: cfg.max_distance,
        ..BakeConfig::default()
    };
    let t = Instant::now();
    let store = FieldStore::new(bake_all(scene, &bake_cfg)?);
    let bake_seconds = t.elapsed().as_secs_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(Vec3, Vec3)> = (0..cfg.queries)
        .map(|_| local_pair(scene, &mut rng, cfg.local_radius))
        .collect();
    let n = scene.portals.len();
    let culled = SearchConfig::default();
    let uncull = SearchConfig {
        culling: false,
        ..culled
    };

    let (mut lookups, mut lookups_uncull, mut evals, mut near) = (0usize, 0usize, 0usize, 0usize);
    let mut search_time = Duration::ZERO;
    for &(s, l) in &pairs {
        let t = Instant::now();
        let r = find_portals(&store, &scene.portals, s, l, &culled);
        search_time += t.elapsed();
        lookups += r.stats.lookups;
        evals += r.stats.full_evaluations;
        lookups_uncull += find_portals(&store, &scene.portals, s, l, &uncull)
            .stats
            .lookups;
        near += scene
            .portals
            .iter()
            .filter(|p| p.centroid.distance(s).min(p.centroid.distance(l)) <= cfg.local_radius)
            .count();
    }
    let mut oracle_time = Duration::ZERO;
    for &(s, l) in &pairs {
        let t = Instant::now();
        let path = shortest_path(scene, s, l)?;
        oracle_time += t.elapsed();
        std::hint::black_box(path);
    }
    let q = pairs.len().max(1) as f64;
    let full_evaluations = evals as f64 / q;
    let search_micros = search_time.as_secs_f64() * 1e6 / q;
    let oracle_micros = oracle_time.as_secs_f64() * 1e6 / q;
    Ok(BenchRow {
        doors: n,
        probes: store.dataset().probes.len(),
        queries: pairs.len(),
        bake_seconds,
        lookups_uncull: lookups_uncull as f64 / q,
        lookups: lookups as f64 / q,
        full_evaluations,
        cull_reduction: n as f64 / full_evaluations.max(f64::MIN_POSITIVE),
        near_fraction: near as f64 / q / n.max(1) as f64,
        search_micros,
        oracle_micros,
        speedup: oracle_micros / search_micros.max(f64::MIN_POSITIVE),
    })
}

/// Measures office floors with each door count in `cfg.doors`.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.doors
        .iter()
        .map(|&d| bench_scene(&fixtures::office(d), cfg))
        .collect()
}

/// Largest ratio of per-portal growth between consecutive rows, for the
/// given lookup column. 1.0 means exactly linear or better.
pub fn linearity(rows: &[BenchRow], lookups: impl Fn(&BenchRow) -> f64) -> f64 {
    rows.windows(2)
        .map(|w| {
            let grow = lookups(&w[1]) / lookups(&w[0]);
            let size = w[1].doors as f64 / w[0].doors as f64;
            grow / size
        })
        .fold(0.0f64, f64::max)
}

/// Scaling check derived from a set of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

/// Allowed per-portal lookup growth between consecutive scene sizes.
pub const LINEARITY_LIMIT: f64 = 1.2;
/// Required culling reduction on sparse queries.
pub const CULL_REDUCTION_MIN: f64 = 5.0;
/// Sparse means at most this fraction of portals near the pair.
pub const SPARSE_NEAR_FRACTION: f64 = 0.1;
/// Required oracle-over-search time ratio on the largest scene.
pub const SPEEDUP_MIN: f64 = 10.0;

pub fn gates(rows: &[BenchRow]) -> Vec<Gate> {
    let at_most = |name: &str, value: f64, limit: f64| Gate {
        name: name.to_string(),
        value,
        limit,
        passed: value <= limit,
    };
    let at_least = |name: String, value: f64, limit: f64| Gate {
        name,
        value,
        limit,
        passed: value >= limit,
    };
    let mut out = vec![
        at_most(
            "lookup growth, culled",
            linearity(rows, |r| r.lookups),
            LINEARITY_LIMIT,
        ),
        at_most(
            "lookup growth, unculled",
            linearity(rows, |r| r.lookups_uncull),
            LINEARITY_LIMIT,
        ),
    ];
    for r in rows
        .iter()
        .filter(|r| r.near_fraction <= SPARSE_NEAR_FRACTION)
    {
        out.push(at_least(
            format!("cull reduction, N={}", r.doors),
            r.cull_reduction,
            CULL_REDUCTION_MIN,
        ));
    }
    if let Some(r) = rows.iter().max_by_key(|r| r.doors) {
        out.push(at_least(
            format!("speedup over oracle, N={}", r.doors),
            r.speedup,
            SPEEDUP_MIN,
        ));
    }
    out
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "doors  probes  bake_s  lookups_uncull  lookups  full_evals  cull_x  near  search_us  oracle_us  speedup\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{:>5}  {:>6}  {:>6.2}  {:>14.1}  {:>7.2}  {:>10.2}  {:>6.1}  {:>4.2}  {:>9.1}  {:>9.1}  {:>7.1}\n",
            r.doors,
            r.probes,
            r.bake_seconds,
            r.lookups_uncull,
            r.lookups,
            r.full_evaluations,
            r.cull_reduction,
            r.near_fraction,
            r.search_micros,
            r.oracle_micros,
            r.speedup
        ));
    }
    s
}
