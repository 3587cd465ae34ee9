use dronecine_core::geometry::{EnuPoint, Pose};
use dronecine_core::scan::{plan_scan, verify_overlap, OverlapMode, ScanArea, ScanConfig, ScanPlan};
use proptest::prelude::*;

use crate::support::{camera, check};

struct Achieved {
    in_track: f64,
    cross_track: Option<f64>,
}

fn horizontal(a: &Pose, b: &Pose) -> EnuPoint {
    let mut d = b.position - a.position;
    d.up = 0.0;
    d
}

/// Worst overlap per layer from capture geometry alone: consecutive
/// captures share `1 - step / extent` of their footprint along the leg, and
/// neighbouring legs `1 - gap / extent` across it.
fn achieved(plan: &ScanPlan) -> Vec<Achieved> {
    let cam = &plan.config.camera;
    plan.layers
        .iter()
        .map(|layer| {
            let along_extent = cam.sensor_height() / cam.focal_length() * layer.height;
            let across_extent = cam.sensor_width() / cam.focal_length() * layer.height;
            let mut in_track = f64::INFINITY;
            let mut cross_track: Option<f64> = None;
            for pass in &layer.passes {
                for leg in &pass.legs {
                    for w in leg.captures.windows(2) {
                        let step = horizontal(&w[0], &w[1]).horizontal_norm();
                        in_track = in_track.min((1.0 - step / along_extent).max(0.0));
                    }
                }
                for pair in pass.legs.windows(2) {
                    let a = &pair[0].captures;
                    let dir = horizontal(&a[0], &a[a.len() - 1]);
                    let dir = dir * (1.0 / dir.horizontal_norm());
                    let normal = EnuPoint::new(dir.north, -dir.east, 0.0);
                    let gap = horizontal(&a[0], &pair[1].captures[0]).dot(&normal).abs();
                    let ratio = (1.0 - gap / across_extent).max(0.0);
                    cross_track = Some(cross_track.map_or(ratio, |c: f64| c.min(ratio)));
                }
            }
            Achieved { in_track, cross_track }
        })
        .collect()
}

fn overlap_near_thresholds() -> impl Strategy<Value = f64> {
    prop_oneof![0.3..0.88f64, Just(0.7), Just(0.8), 0.69..0.71f64, 0.79..0.81f64]
}

pub fn run() {
    let cases = (
        (
            10.0..60.0f64,
            10.0..60.0f64,
            -180.0..180.0f64,
            -50.0..50.0f64,
            -50.0..50.0f64,
        ),
        (20.0..60.0f64, 0.0..10.0f64, 0.0..10.0f64),
        (overlap_near_thresholds(), 0.3..0.85f64, any::<bool>(), any::<bool>()),
        camera(12.0..36.0, 8.0..35.0),
    );
    check(
        200,
        cases,
        |((lx, ly, rot, e, n), (h, avg, extra), (in_ov, cross_ov, both, detail), cam)| {
            let area = ScanArea {
                origin_corner: EnuPoint::new(e, n, 0.0),
                length_x: lx,
                length_y: ly,
                rotation: rot,
            };
            let config = ScanConfig {
                base_height: h,
                avg_building_height: avg,
                max_building_height: avg + extra,
                in_track_overlap: in_ov,
                cross_track_overlap: cross_ov,
                camera: cam,
                both_directions: both,
                ..ScanConfig::default()
            };
            let mode = if detail {
                OverlapMode::Detail
            } else {
                OverlapMode::Landscape
            };
            let threshold = if detail { 0.80 } else { 0.70 };
            let plan = plan_scan(&area, &config).unwrap();
            let report = verify_overlap(&plan, &cam, mode).unwrap();
            let oracle = achieved(&plan);

            prop_assert!(report.min_in_track >= in_ov - 1e-6);
            prop_assert!(report.min_cross_track.unwrap() >= cross_ov - 1e-6);
            let mut expected_warnings = 0;
            for (layer, truth) in report.layers.iter().zip(&oracle) {
                prop_assert!((layer.min_in_track - truth.in_track).abs() < 1e-9);
                prop_assert!(truth.in_track >= in_ov - 1e-6);
                let cross = truth.cross_track.unwrap();
                prop_assert!((layer.min_cross_track.unwrap() - cross).abs() < 1e-9);
                prop_assert!(cross >= cross_ov - 1e-6);
                if truth.in_track < threshold - 1e-9 {
                    expected_warnings += 1;
                }
            }
            prop_assert_eq!(report.warnings.len(), expected_warnings);
            Ok(())
        },
    );

    // exactly divisible legs hit the requested ratio on the nose
    let exact = |in_track_overlap: f64, mode: OverlapMode| {
        let config = ScanConfig {
            in_track_overlap,
            ..ScanConfig::default()
        };
        // 7.6 m in-track footprint at 20 m
        let side = 7.6 * (1.0 - in_track_overlap) * 10.0;
        let plan = plan_scan(&ScanArea::square(side), &config).unwrap();
        verify_overlap(&plan, &config.camera, mode).unwrap()
    };
    assert_eq!(exact(0.6, OverlapMode::Detail).warnings.len(), 3);
    assert_eq!(exact(0.6, OverlapMode::Landscape).warnings.len(), 3);
    assert!(exact(0.7, OverlapMode::Landscape).warnings.is_empty());
    assert_eq!(exact(0.75, OverlapMode::Detail).warnings.len(), 3);
    assert!(exact(0.8, OverlapMode::Detail).warnings.is_empty());
}
