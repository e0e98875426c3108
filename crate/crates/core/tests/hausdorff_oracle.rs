mod common;

use common::*;
use fpverify::hausdorff::score_points;
use fpverify::{apply_transform, directed_hausdorff, directed_modified_hausdorff, hausdorff, match_decision, modified_hausdorff};
use fpverify::{CorePoint, Minutia, MinutiaKind, MinutiaeSet, Point2, RigidTransform};
use proptest::prelude::*;

fn points() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((-300.0..300.0f64, -300.0..300.0f64).prop_map(|(x, y)| Point2::new(x, y)), 1..50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn equals_double_loop(a in points(), b in points()) {
        prop_assert_eq!(directed_hausdorff(&a, &b).unwrap(), brute_directed_h(&a, &b));
        prop_assert_eq!(hausdorff(&a, &b).unwrap(), brute_hausdorff(&a, &b));
        prop_assert_eq!(directed_modified_hausdorff(&a, &b).unwrap(), brute_directed_mhd(&a, &b));
        prop_assert_eq!(modified_hausdorff(&a, &b).unwrap(), brute_mhd(&a, &b));
        let s = score_points(&a, &b, 12.0).unwrap();
        prop_assert_eq!(s.mhd, brute_mhd(&a, &b));
        prop_assert_eq!(s.hausdorff, brute_hausdorff(&a, &b));
    }

    #[test]
    fn symmetry_identity_dominance(a in points(), b in points()) {
        prop_assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff(&b, &a).unwrap());
        prop_assert_eq!(modified_hausdorff(&a, &b).unwrap(), modified_hausdorff(&b, &a).unwrap());
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(modified_hausdorff(&a, &a).unwrap(), 0.0);
        prop_assert!(modified_hausdorff(&a, &b).unwrap() <= hausdorff(&a, &b).unwrap());
    }

    #[test]
    fn rigid_invariance(a in points(), b in points(), rot in 0.0..std::f64::consts::TAU, dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let t = RigidTransform::new(rot, (dx, dy), (10.0, -20.0));
        let move_all = |v: &[Point2]| -> Vec<Point2> {
            v.iter().map(|p| { let (x, y) = t.apply_point(p.x, p.y); Point2::new(x, y) }).collect()
        };
        let (ta, tb) = (move_all(&a), move_all(&b));
        prop_assert!((hausdorff(&ta, &tb).unwrap() - hausdorff(&a, &b).unwrap()).abs() < 1e-9);
        prop_assert!((modified_hausdorff(&ta, &tb).unwrap() - modified_hausdorff(&a, &b).unwrap()).abs() < 1e-9);
        prop_assert!((directed_hausdorff(&ta, &tb).unwrap() - directed_hausdorff(&a, &b).unwrap()).abs() < 1e-9);
        prop_assert!((directed_modified_hausdorff(&ta, &tb).unwrap() - directed_modified_hausdorff(&a, &b).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn match_decision_is_translation_blind() {
    let ms: Vec<Minutia> = (0..12)
        .map(|i| Minutia::new(100.0 + 13.0 * i as f64, 90.0 + (i * i % 17) as f64 * 4.0, 0.1, MinutiaKind::Bifurcation))
        .collect();
    let set = MinutiaeSet::new(ms, Some(CorePoint::new(150.0, 120.0)), "a").unwrap();
    let moved = apply_transform(&set, &RigidTransform::translation(-33.5, 71.25));
    let s = match_decision(&moved, &set, 1.0).unwrap();
    assert!(s.mhd < 1e-12);
}
