use std::f64::consts::PI;

use flatflow_core::analysis::{detect_limit, verify_flow_invariants};
use flatflow_core::catalog::{classify, enumerate_catalog, Verdict, DEFAULT_EPSILON0};
use flatflow_core::field::{mcf_dissipation, rasterize};
use flatflow_core::flow::{run_flow, FlowConfig, FlowKind};
use flatflow_core::geometry::{shapes, snapshot};
use flatflow_core::{PeriodVector, Vec2};
use proptest::prelude::*;

#[test]
fn two_disks_stay_two_disks() {
    let e = shapes::disks(&[Vec2::new(0.25, 0.25), Vec2::new(0.75, 0.75)], 0.12, 256).unwrap();
    let mut cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, e.area());
    cfg.max_time = 0.05;
    let run = run_flow(&e, &cfg).unwrap();
    assert!(verify_flow_invariants(&run.reports, &cfg).all_passed());
    let catalog = enumerate_catalog(cfg.area, 6.0).unwrap();
    let lim = detect_limit(&run.samples, &catalog, DEFAULT_EPSILON0, cfg.grid).unwrap();
    assert_eq!(lim.verdict, Verdict::Disks { count: 2 });
    let a = &lim.component_areas;
    assert!((a[0] - a[1]).abs() < 1e-6, "{a:?}");
}

#[test]
fn slanted_strip_is_classified_with_its_period() {
    let e = shapes::slanted_strip(PeriodVector::new(1, 1), Vec2::new(0.2, 0.0), 0.25, 512).unwrap();
    let catalog = enumerate_catalog(e.area(), 6.0).unwrap();
    let c = classify(&e, DEFAULT_EPSILON0, &catalog).unwrap();
    match c.verdict {
        Verdict::Strips { count: 1, period } => assert_eq!(period.canonical(), PeriodVector::new(1, 1)),
        v => panic!("{v:?}"),
    }
    assert!((c.perimeter - 2.0 * 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn elliptic_hole_relaxes_to_a_round_hole() {
    let e = shapes::ellipse(Vec2::new(0.5, 0.5), 0.2, 0.12, 400).unwrap().complement();
    let mut cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, e.area());
    cfg.max_time = 0.2;
    let run = run_flow(&e, &cfg).unwrap();
    let catalog = enumerate_catalog(cfg.area, 6.0).unwrap();
    let lim = detect_limit(&run.samples, &catalog, DEFAULT_EPSILON0, cfg.grid).unwrap();
    assert_eq!(lim.verdict, Verdict::ComplementDisks { count: 1 });
    let hole = 1.0 - cfg.area;
    let circle = 2.0 * (PI * hole).sqrt();
    assert!(run.final_state.region.perimeter() - circle < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn snapshot_round_trip_is_exact(
        r in 0.05f64..0.3, eps in 0.0f64..0.04, mode in 2u32..6, cx in 0.0f64..1.0, cy in 0.0f64..1.0
    ) {
        let e = shapes::perturbed_disk(Vec2::new(cx, cy), r, eps, mode, 128).unwrap();
        let back = snapshot::read_region(&snapshot::write_region(&e)).unwrap();
        prop_assert_eq!(back.perimeter(), e.perimeter());
        prop_assert_eq!(back.area(), e.area());
    }

    #[test]
    fn rasterized_area_is_translation_invariant(
        r in 0.05f64..0.3, tx in -1.0f64..1.0, ty in -1.0f64..1.0
    ) {
        let e = shapes::disk(Vec2::new(0.5, 0.5), r, 256).unwrap();
        let moved = e.translated(Vec2::new(tx, ty));
        let a = rasterize(&e, 64).unwrap().mean();
        let b = rasterize(&moved, 64).unwrap().mean();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((a - e.area()).abs() < 1e-10);
    }

    #[test]
    fn mcf_dissipation_is_symmetric_in_translation_direction(d in 0.005f64..0.05) {
        // the set moved by d or by -d costs the same
        let e = shapes::disk(Vec2::new(0.5, 0.5), 0.2, 512).unwrap();
        let plus = e.translated(Vec2::new(d, 0.0));
        let minus = e.translated(Vec2::new(-d, 0.0));
        let a = mcf_dissipation(&plus, &e, 128).unwrap().value;
        let b = mcf_dissipation(&minus, &e, 128).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 + 1e-6 * a);
    }
}
