mod common;

use std::f64::consts::PI;

use common::{analytic_block_direction, angle_gap, winding_index};
use fpverify::orientation::{detect_core, estimate_block_directions, poincare_index, BLOCK_SIZE};
use fpverify::synth::{zero_pole_direction, zero_pole_field, Singularities};
use fpverify::{GrayImage, Point2};

fn sinusoid(alpha: f64, size: usize) -> GrayImage {
    let (s, c) = alpha.sin_cos();
    GrayImage::from_fn(size, size, |x, y| {
        let u = -(x as f64) * s + (y as f64) * c;
        (128.0 + 100.0 * (2.0 * PI * u / 8.0).sin()).round() as u8
    })
    .unwrap()
}

#[test]
fn sinusoid_family_matches_analytic_gradients() {
    for step in 0..8 {
        let alpha = step as f64 * PI / 8.0;
        let field = estimate_block_directions(&sinusoid(alpha, 128)).unwrap();
        for r in 1..field.rows() - 1 {
            for c in 1..field.cols() - 1 {
                let oracle = analytic_block_direction(alpha, r, c);
                assert!(angle_gap(oracle, alpha) < 1e-9);
                let got = field.direction(r, c);
                assert!(angle_gap(got, oracle) < 0.05, "alpha {alpha} block ({r},{c}): {got} vs {oracle}");
            }
        }
    }
}

#[test]
fn horizontal_ridges_are_certain() {
    let field = estimate_block_directions(&sinusoid(0.0, 96)).unwrap();
    for r in 1..field.rows() - 1 {
        for c in 1..field.cols() - 1 {
            assert!(angle_gap(field.direction(r, c), 0.0) <= 0.02);
            assert!(field.certainty(r, c) >= 0.95);
        }
    }
}

#[test]
fn loop_core_at_block_8_8() {
    // planted core in the middle of block (8, 8), delta further down
    let core = Point2::new(8.5 * BLOCK_SIZE as f64 + 0.3, 8.5 * BLOCK_SIZE as f64 - 0.2);
    let sing = Singularities { cores: vec![core], deltas: vec![Point2::new(core.x + 70.0, core.y + 110.0)] };
    let field = zero_pole_field(24, 24, &sing, 0.0, Point2::new(192.0, 192.0), 1000.0);

    // the analytic field winds by +1/2 around the core and 0 around a point far from both
    let dir = |x: f64, y: f64| zero_pole_direction(Point2::new(x, y), &sing, 0.0);
    assert!((winding_index(dir, core.x, core.y, 10.0) - 0.5).abs() < 1e-9);
    assert!(winding_index(dir, 40.0, 300.0, 10.0).abs() < 1e-9);

    let det = detect_core(&field).unwrap();
    assert!(det.confident);
    assert!(det.core.position().dist(core) <= BLOCK_SIZE as f64, "{:?}", det.core);

    // exactly one +1/2 window
    let mut halves = 0;
    for r in 0..field.rows() - 1 {
        for c in 0..field.cols() - 1 {
            if poincare_index(&field, r, c) == 0.5 {
                halves += 1;
            }
        }
    }
    assert_eq!(halves, 1);
}

#[test]
fn stronger_of_two_loops_wins() {
    let a = Point2::new(104.0, 104.0);
    let b = Point2::new(296.0, 296.0);
    let sing = Singularities { cores: vec![a, b], deltas: vec![Point2::new(104.0, 296.0), Point2::new(296.0, 104.0)] };
    let base = zero_pole_field(26, 26, &sing, 0.0, Point2::new(208.0, 208.0), 1000.0);
    let certs: Vec<f64> = (0..26 * 26)
        .map(|i| {
            let (r, c) = (i / 26, i % 26);
            if r >= 13 && c >= 13 { 1.0 } else { 0.6 }
        })
        .collect();
    let field = fpverify::OrientationField::new(26, 26, base.directions().to_vec(), certs);
    let det = detect_core(&field).unwrap();
    assert!(det.confident);
    assert!(det.core.position().dist(b) <= BLOCK_SIZE as f64 * 1.5, "{:?}", det.core);
}
