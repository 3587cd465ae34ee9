use dronecine_core::geometry::{CameraIntrinsics, EnuPoint, Pose};
use dronecine_core::shot::{generate_shot, ShotParams, ShotSpec, ShotType, TargetRef, Trajectory};
use dronecine_core::sim::landmark_coverage;
use proptest::prelude::*;

use crate::support::check;

/// Pinhole visibility: project onto the image plane at unit depth and
/// compare against the half sensor over the focal length.
fn visible(pose: &Pose, cam: &CameraIntrinsics, landmark: &EnuPoint) -> bool {
    let (yaw, pitch) = (pose.yaw.to_radians(), pose.gimbal_pitch.to_radians());
    let d = *landmark - pose.position;
    // rotate into a frame with x to the right, y along the optical axis, z up
    let x = d.east * yaw.cos() - d.north * yaw.sin();
    let level = d.east * yaw.sin() + d.north * yaw.cos();
    let y = level * pitch.cos() - d.up * pitch.sin();
    let z = level * pitch.sin() + d.up * pitch.cos();
    y > 0.0
        && (x / y).abs() <= cam.sensor_width() / (2.0 * cam.focal_length())
        && (z / y).abs() <= cam.sensor_height() / (2.0 * cam.focal_length())
}

fn brute_force(traj: &Trajectory, cam: &CameraIntrinsics, landmark: &EnuPoint) -> f64 {
    let seen = traj.samples.iter().filter(|s| visible(&s.pose, cam, landmark)).count();
    seen as f64 / traj.samples.len() as f64
}

fn shot(target: EnuPoint, params: ShotParams) -> (Trajectory, CameraIntrinsics) {
    let spec = ShotSpec {
        params,
        ..ShotSpec::new(params.shot_type(), TargetRef::StaticPoint { point: target })
    };
    (generate_shot(&spec, &move |_| target, 0.05).unwrap(), spec.camera)
}

pub fn run() {
    let landmark = EnuPoint::new(40.0, -25.0, 6.0);
    let (orbit, cam) = shot(landmark, ShotParams::defaults(ShotType::Orbit));
    assert_eq!(landmark_coverage(&orbit, &cam, &landmark), 1.0);

    // approaching from the south and looking north; the landmark is behind
    let (approach, cam) = shot(
        EnuPoint::ORIGIN,
        ShotParams::Establish {
            bearing: 0.0,
            start_distance: 80.0,
            end_distance: 20.0,
            start_height: 30.0,
            end_height: 10.0,
        },
    );
    let behind = EnuPoint::new(0.0, -200.0, 10.0);
    assert_eq!(landmark_coverage(&approach, &cam, &behind), 0.0);
    assert_eq!(brute_force(&approach, &cam, &behind), 0.0);

    let (flyby, cam) = shot(EnuPoint::ORIGIN, ShotParams::defaults(ShotType::Flyby));
    let mut partial = 0;
    for landmark in [
        EnuPoint::new(12.0, 0.0, 0.0),
        EnuPoint::new(0.0, 25.0, 0.0),
        EnuPoint::new(-8.0, -3.0, 4.0),
        EnuPoint::new(30.0, 10.0, 0.0),
    ] {
        let ratio = landmark_coverage(&flyby, &cam, &landmark);
        assert_eq!(ratio, brute_force(&flyby, &cam, &landmark), "{landmark:?}");
        if ratio > 0.0 && ratio < 1.0 {
            partial += 1;
        }
    }
    assert!(partial >= 2, "offset landmarks should be partly covered");

    let cases = (
        2.0..40.0f64,
        20.0..150.0f64,
        2.0..40.0f64,
        0.0..360.0f64,
        -40.0..40.0f64,
        -40.0..40.0f64,
        0.0..10.0f64,
    );
    check(40, cases, |(offset, leg, h, bearing, le, ln, lu)| {
        let (traj, cam) = shot(
            EnuPoint::ORIGIN,
            ShotParams::Flyby {
                offset,
                leg_length: leg,
                height: h,
                bearing,
            },
        );
        let landmark = EnuPoint::new(le, ln, lu);
        prop_assert_eq!(
            landmark_coverage(&traj, &cam, &landmark),
            brute_force(&traj, &cam, &landmark)
        );
        Ok(())
    });
}
