use super::*;
use crate::bake::{bake_all, BakeConfig};
use crate::fixtures::Floorplan;

type Vec3 = crate::geom::Vector3<f64>;

fn open_room() -> FieldStore {
    let f = Floorplan::new(24, 24, 0.5).unwrap();
    let scene = f.build().unwrap();
    FieldStore::new(bake_all(&scene, &BakeConfig::default()).unwrap())
}

#[test]
fn exact_sample_returns_stored_delay() {
    let store = open_room();
    let ds = store.dataset();
    let probe = 0;
    let j = ds.lattice.index([2, 3, 0]);
    let src = ds.emitter_position(j);
    let listener = ds.probes.positions[probe];
    let stored = ds.fields[probe].sample(j, src, &ds.config).unwrap();
    for mode in [InterpMode::Linear, InterpMode::Improved] {
        let p = store.lookup_mode(src, listener, mode).unwrap();
        assert!((p.delay - stored.delay).abs() < 1e-12, "{mode:?}");
        assert!((p.loudness_db - stored.loudness_db).abs() < 1e-12);
    }
}

#[test]
fn improved_beats_linear_in_free_field() {
    let store = open_room();
    let ds = store.dataset();
    let listener = ds.probes.positions[4];
    let c = ds.config.speed_of_sound;
    let mut worse = 0;
    let mut n = 0;
    for &(x, y) in &[(2.1, 7.3), (9.4, 3.3), (5.2, 10.9), (7.7, 7.7), (1.1, 1.4)] {
        let src = Vec3::new(x, y, 0.25);
        let truth = src.distance(listener) / c;
        let imp = store
            .lookup_mode(src, listener, InterpMode::Improved)
            .unwrap();
        let lin = store
            .lookup_mode(src, listener, InterpMode::Linear)
            .unwrap();
        assert!(
            (imp.delay - truth).abs() < 1e-3,
            "improved error at ({x},{y})"
        );
        n += 1;
        if (imp.delay - truth).abs() >= (lin.delay - truth).abs() {
            worse += 1;
        }
    }
    assert!(worse < n);
}

#[test]
fn listener_on_probe_uses_only_that_probe() {
    let store = open_room();
    let p = store.dataset().probes.positions[3];
    assert_eq!(store.probe_weights(p), vec![(3, 1.0)]);
    let near = store.probe_weights(p + Vec3::new(0.3, 0.1, 0.0));
    assert!(near.len() > 1);
    assert_eq!(near[0].0, 3);
}

#[test]
fn sealed_room_is_no_path() {
    let mut f = Floorplan::new(24, 24, 0.5).unwrap();
    f.wall_x(12, 0, 24);
    let store = FieldStore::new(bake_all(&f.build().unwrap(), &BakeConfig::default()).unwrap());
    let r = store.lookup(Vec3::new(1.0, 5.0, 0.25), Vec3::new(10.0, 5.0, 0.25));
    assert_eq!(r, Err(LookupError::NoPath));
    assert!(store
        .lookup(Vec3::new(1.0, 5.0, 0.25), Vec3::new(3.0, 5.0, 0.25))
        .is_ok());
}

#[test]
fn out_of_bounds_is_reported() {
    let store = open_room();
    let r = store.lookup(Vec3::new(-1.0, 5.0, 0.25), Vec3::new(3.0, 5.0, 0.25));
    assert!(matches!(r, Err(LookupError::OutOfBounds(_))));
}

#[test]
fn emitter_weights_partition_unity() {
    let store = open_room();
    for &(x, y) in &[(0.1, 0.1), (3.3, 4.4), (11.9, 11.9), (6.0, 2.0)] {
        let w: f64 = store
            .emitter_weights(Vec3::new(x, y, 0.25))
            .iter()
            .map(|e| e.1)
            .sum();
        assert!((w - 1.0).abs() < 1e-12);
    }
}

#[test]
fn free_field_quantizes_delay() {
    let f = FreeField::default();
    let p = f.lookup(Vec3::zero(), Vec3::new(34.0, 0.0, 0.0)).unwrap();
    assert!((p.delay - 0.1).abs() < 1e-12);
    assert_eq!(p.direction, Vec3::new(1.0, 0.0, 0.0));
    let q = f.lookup(Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)).unwrap();
    assert!((q.delay - 0.002).abs() < 1e-12);
}
