use super::*;
use crate::bake::{bake_all, BakeConfig};
use crate::fieldstore::{FieldStore, FreeField};
use crate::fixtures;
use crate::scene::SceneDescription;

type Vec3 = crate::geom::Vector3<f64>;

fn baked(scene: &SceneDescription) -> FieldStore {
    FieldStore::new(bake_all(scene, &BakeConfig::default()).unwrap())
}

fn at(x: f64, y: f64) -> Vec3 {
    Vec3::new(x, y, 0.25)
}

#[test]
fn same_room_near_door_is_empty() {
    let scene = fixtures::two_room();
    let store = baked(&scene);
    let r = find_portals(
        &store,
        &scene.portals,
        at(9.0, 4.2),
        at(3.0, 7.0),
        &SearchConfig::default(),
    );
    assert!(r.portals.is_empty(), "{:?}", r.records);
    assert_eq!(r.last_portal, None);
}

#[test]
fn single_doorway_found() {
    let scene = fixtures::two_room();
    let store = baked(&scene);
    let r = find_portals(
        &store,
        &scene.portals,
        at(3.0, 2.0),
        at(16.0, 8.0),
        &SearchConfig::default(),
    );
    assert_eq!(r.portals, vec![1]);
    assert_eq!(r.last_portal, Some(1));
    let rec = r.record(1).unwrap();
    assert!(rec.slack <= 340.0 * 0.010);
}

#[test]
fn three_rooms_in_series() {
    let scene = fixtures::three_room();
    let store = baked(&scene);
    let r = find_portals(
        &store,
        &scene.portals,
        at(4.0, 6.0),
        at(26.0, 3.0),
        &SearchConfig::default(),
    );
    assert_eq!(r.portals, vec![1, 2]);
    assert_eq!(r.last_portal, Some(2));
    let back = find_portals(
        &store,
        &scene.portals,
        at(26.0, 3.0),
        at(4.0, 6.0),
        &SearchConfig::default(),
    );
    assert_eq!(back.portals, vec![1, 2]);
    assert_eq!(back.last_portal, Some(1));
}

#[test]
fn courtyard_door_into_room() {
    let scene = fixtures::courtyard();
    let store = baked(&scene);
    // Courtyard to the top-right room.
    let r = find_portals(
        &store,
        &scene.portals,
        at(15.0, 8.0),
        at(25.0, 26.0),
        &SearchConfig::default(),
    );
    assert_eq!(r.portals, vec![3]);
    // Bottom-left room through the courtyard to the top-right room.
    let r = find_portals(
        &store,
        &scene.portals,
        at(4.0, 4.0),
        at(25.0, 26.0),
        &SearchConfig::default(),
    );
    assert_eq!(r.portals, vec![1, 3]);
    assert_eq!(r.last_portal, Some(3));
}

#[test]
fn invariant_under_normal_flip_and_permutation() {
    let scene = fixtures::three_room();
    let store = baked(&scene);
    let cfg = SearchConfig::default();
    let (s, l) = (at(4.0, 6.0), at(26.0, 3.0));
    let base = find_portals(&store, &scene.portals, s, l, &cfg);
    let mut flipped = scene.portals.clone();
    flipped.iter_mut().for_each(|p| p.normal = -p.normal);
    flipped.reverse();
    let other = find_portals(&store, &flipped, s, l, &cfg);
    assert_eq!(base.portals, other.portals);
    assert_eq!(base.last_portal, other.last_portal);
}

#[test]
fn lookup_budget() {
    let scene = fixtures::rooms_in_series(6);
    let store = baked(&scene);
    for culling in [true, false] {
        let cfg = SearchConfig {
            culling,
            ..SearchConfig::default()
        };
        let r = find_portals(&store, &scene.portals, at(2.0, 2.0), at(10.0, 4.0), &cfg);
        assert!(r.stats.lookups <= 1 + 2 * r.stats.full_evaluations);
        if !culling {
            assert_eq!(r.stats.lookups, 1 + 2 * scene.portals.len());
        } else {
            assert!(r.stats.culled_bbox + r.stats.culled_ellipsoid > 0);
        }
    }
}

#[test]
fn no_path_gives_empty_result() {
    let mut f = fixtures::Floorplan::new(24, 12, 0.5).unwrap();
    f.wall_x(12, 0, 12);
    let scene = f.build().unwrap();
    let store = baked(&scene);
    let r = find_portals(
        &store,
        &scene.portals,
        at(2.0, 2.0),
        at(10.0, 4.0),
        &SearchConfig::default(),
    );
    assert!(r.direct.is_none());
    assert_eq!(r.path_length, None);
    assert!(r.portals.is_empty());
}

#[test]
fn free_field_line_of_sight_tightening() {
    let scene = fixtures::two_room();
    let p = &scene.portals[0];
    let field = FreeField::default();
    let (s, l) = (at(5.0, 5.0), at(15.0, 5.0));
    let t = string_tighten(&field, p, s, l).unwrap();
    // Quantized delays shift the apparent ends by at most half a quantum.
    let half_q = 340.0 * 0.001;
    assert!((t.apparent_source - s).norm() <= half_q + 1e-9);
    assert!((t.apparent_listener - l).norm() <= half_q + 1e-9);
    assert!((t.corrected_length - 10.0).abs() <= 2.0 * half_q + 1e-9);
    assert!(pierce_test(&field, p, s, l));
    assert!(!pierce_test(&field, p, s, at(5.0, 8.0)));
}
