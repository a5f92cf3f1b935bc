use std::f64::consts::PI;

use maxsheet_core::gallery::{build, build_all, run_regression, GalleryParams, NAMES};
use maxsheet_core::singularity::find_singular_set;
use maxsheet_core::{evolve, Sheet, SheetError, Vec2};

#[test]
fn every_entry_passes_its_regression() {
    for entry in build_all().unwrap() {
        let report = run_regression(&entry);
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
        assert!(report.passed, "{}: {failed:?}", entry.name);
        assert!(!report.checks.is_empty(), "{} has nothing to check", entry.name);
    }
}

#[test]
fn names_round_trip_and_unknown_names_fail() {
    for name in NAMES {
        assert_eq!(build(name, &GalleryParams::default()).unwrap().name, name);
    }
    assert!(matches!(build("helicoid", &GalleryParams::default()), Err(SheetError::UnknownName(_))));
}

#[test]
fn doubly_periodic_sheet_translates_by_one_period() {
    let e = build("doubly_periodic", &GalleryParams::default()).unwrap();
    let period = e.data.domain().period().unwrap();
    let sheet = evolve(e.data.clone());
    for (s, t) in [(0.1, 0.2), (-0.7, 1.1), (1.3, -0.4)] {
        let a = sheet.first(s, t).unwrap().g;
        let b = sheet.first(s + period, t).unwrap().g;
        assert!((b - a).distance(Vec2::new(1.0, 0.0)) < 1e-9, "{a:?} {b:?}");
    }
}

#[test]
fn cigar_singular_set_matches_its_image_law() {
    let l = PI / 4.0;
    let e = build("cigar", &GalleryParams { l: Some(l), ..Default::default() }).unwrap();
    let set = find_singular_set(&e.data, e.reference.diamond.unwrap(), 1e-2).unwrap();
    let image = e.reference.singular_image.clone().unwrap();
    let sheet = evolve(e.data.clone());
    assert!(!set.is_empty());
    for p in &set.points {
        let g = sheet.first(p.s, p.t).unwrap().g;
        assert!(g.distance(image(p.s, p.t)) < 1e-9);
        assert!(g.distance(Vec2::new(0.0, p.t.abs() - l)) < 1e-9);
    }
}

#[test]
fn grim_reaper_tangent_stays_in_half_open_semicircle() {
    let e = build("grim_reaper", &GalleryParams::default()).unwrap();
    for s in [-8.0, -1.0, 0.0, 2.0, 5.0] {
        let th = e.data.theta(s);
        assert!((-PI / 2.0..PI / 2.0).contains(&th), "θ({s}) = {th}");
    }
    assert!((e.data.theta(-3.0) + PI / 2.0).abs() < 1e-12);
}
