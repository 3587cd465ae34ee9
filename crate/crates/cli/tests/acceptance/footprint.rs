use dronecine_core::geometry::{
    ground_footprint, scale_working_distance, CameraIntrinsics, FootprintAxis, ReferenceSetup,
};
use proptest::prelude::*;

use crate::support::{camera, check, rel_err};

/// Ground coverage of one sensor side by similar triangles.
fn coverage(sensor_mm: f64, focal_mm: f64, distance_m: f64) -> f64 {
    sensor_mm / focal_mm * distance_m
}

pub fn run() {
    let reference = CameraIntrinsics::reference();
    assert_eq!(reference.sensor_width(), 23.66);
    assert_eq!(reference.sensor_height(), 13.3);
    assert_eq!(reference.focal_length(), 35.0);
    let setup = ReferenceSetup::default();
    assert_eq!(setup.camera, reference);
    assert_eq!(setup.working_distance, 20.0);
    let fp = ground_footprint(&reference, 20.0).unwrap();
    // 23.66 * 20 / 35 and 13.3 * 20 / 35, landscape mount
    assert!((fp.cross_track_extent - 13.52).abs() < 1e-12, "{fp:?}");
    assert!((fp.in_track_extent - 7.60).abs() < 1e-12, "{fp:?}");

    let cameras = (
        camera(2.0..60.0, 2.0..300.0),
        camera(2.0..60.0, 2.0..300.0),
        0.5..1000.0f64,
        0.5..500.0f64,
        1e-3..1e3f64,
    );
    check(1000, cameras, |(cam, ref_cam, wd, ref_wd, k)| {
        let fp = ground_footprint(&cam, wd).unwrap();
        let w = coverage(cam.sensor_width(), cam.focal_length(), wd);
        let h = coverage(cam.sensor_height(), cam.focal_length(), wd);
        prop_assert!(rel_err(fp.cross_track_extent, w) <= 1e-12);
        prop_assert!(rel_err(fp.in_track_extent, h) <= 1e-12);

        let scaled = ground_footprint(&cam, k * wd).unwrap();
        prop_assert!(rel_err(scaled.cross_track_extent, k * fp.cross_track_extent) <= 1e-12);
        prop_assert!(rel_err(scaled.in_track_extent, k * fp.in_track_extent) <= 1e-12);

        let setup = ReferenceSetup::new(ref_cam, ref_wd).unwrap();
        let target = ground_footprint(&ref_cam, ref_wd).unwrap();
        for axis in [FootprintAxis::CrossTrack, FootprintAxis::InTrack] {
            let actual_wd = scale_working_distance(&setup, &cam, axis);
            let got = ground_footprint(&cam, actual_wd).unwrap().extent(axis);
            prop_assert!(
                (got - target.extent(axis)).abs() <= 1e-9,
                "{axis:?}: {got} vs {}",
                target.extent(axis)
            );
        }
        Ok(())
    });
}
