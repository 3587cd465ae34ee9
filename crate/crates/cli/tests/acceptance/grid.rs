use dronecine_core::geometry::EnuPoint;
use dronecine_core::scan::{closed_form_pass_count, estimate_image_count, plan_scan, ScanArea, ScanConfig};
use proptest::prelude::*;

use crate::support::{camera, check};

/// Stations on `[0, length]` spaced no more than `step` apart.
fn stations(length: f64, step: f64) -> usize {
    ((length / step).ceil() as usize).max(1) + 1
}

pub fn run() {
    // 50 x 50 m at 20 m with the reference camera: legs every
    // 13.52 * 0.3 = 4.056 m, captures every 7.6 * 0.2 = 1.52 m
    let plan = plan_scan(&ScanArea::square(50.0), &ScanConfig::default()).unwrap();
    for layer in &plan.layers {
        for pass in &layer.passes {
            assert_eq!(pass.legs.len(), 14);
            assert!(pass.legs.iter().all(|l| l.captures.len() == 34));
            let per_pass: usize = pass.legs.iter().map(|l| l.captures.len()).sum();
            assert_eq!(per_pass, 476);
        }
    }
    assert_eq!(plan.total_image_count, 6 * 476);

    let cases = (
        (5.0..120.0f64, 5.0..120.0f64, -30.0..30.0f64),
        (15.0..60.0f64, 0.0..20.0f64, 0.3..0.85f64, 0.3..0.85f64, any::<bool>()),
        camera(12.0..36.0, 8.0..35.0),
    );
    check(
        100,
        cases,
        |((lx, ly, corner), (h, avg, in_ov, cross_ov, both), cam)| {
            let area = ScanArea {
                origin_corner: EnuPoint::new(corner, -corner, 0.0),
                length_x: lx,
                length_y: ly,
                rotation: 0.0,
            };
            let config = ScanConfig {
                base_height: h,
                avg_building_height: avg,
                max_building_height: avg,
                in_track_overlap: in_ov,
                cross_track_overlap: cross_ov,
                camera: cam,
                both_directions: both,
                ..ScanConfig::default()
            };
            let plan = plan_scan(&area, &config).unwrap();
            let mut expected = 0;
            for height in [h, h + avg, h + avg] {
                let along = cam.sensor_height() * height / cam.focal_length() * (1.0 - in_ov);
                let across = cam.sensor_width() * height / cam.focal_length() * (1.0 - cross_ov);
                // legs run along x first, then along y
                let mut passes = vec![(lx, ly)];
                if both {
                    passes.push((ly, lx));
                }
                for (leg, sweep) in passes {
                    let n = stations(leg, along) * stations(sweep, across);
                    prop_assert_eq!(closed_form_pass_count(leg, sweep, along, across), n);
                    expected += n;
                }
            }
            prop_assert_eq!(estimate_image_count(&plan), expected);
            prop_assert_eq!(plan.total_image_count, expected);
            prop_assert_eq!(plan.captures().count(), expected);
            Ok(())
        },
    );
}
