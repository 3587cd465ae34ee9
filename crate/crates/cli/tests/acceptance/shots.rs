use dronecine_core::geometry::{CameraIntrinsics, EnuPoint, ReferenceSetup};
use dronecine_core::shot::{generate_shot, rescale_shot_params, ShotParams, ShotSpec, ShotType, TargetRef};
use proptest::prelude::*;

use crate::support::{camera, check, rel_err};

fn spec(params: ShotParams, speed: f64) -> ShotSpec {
    ShotSpec {
        target: TargetRef::StaticPoint {
            point: EnuPoint::ORIGIN,
        },
        speed,
        camera: CameraIntrinsics::reference(),
        params,
    }
}

fn point() -> impl Strategy<Value = EnuPoint> {
    (-500.0..500.0f64, -500.0..500.0f64, -20.0..50.0f64).prop_map(|(e, n, u)| EnuPoint::new(e, n, u))
}

fn velocity(max: f64) -> impl Strategy<Value = EnuPoint> {
    (-max..max, -max..max).prop_map(|(e, n)| EnuPoint::new(e, n, 0.0))
}

fn orbit_radius() {
    let cases = (
        5.0..150.0f64,
        2.0..80.0f64,
        -360.0..360.0f64,
        30.0..720.0f64,
        any::<bool>(),
        1.0..20.0f64,
        point(),
        velocity(3.0),
    );
    check(50, cases, |(r, h, az, arc, ccw, speed, start, vel)| {
        let arc = if ccw { arc } else { -arc };
        let path = move |t: f64| start + vel * t;
        let params = ShotParams::Orbit {
            radius: r,
            height: h,
            start_azimuth: az,
            arc,
        };
        let traj = generate_shot(&spec(params, speed), &path, 0.05).unwrap();
        for s in &traj.samples {
            let c = path(s.time);
            let p = s.pose.position;
            prop_assert!(((p.east - c.east).hypot(p.north - c.north) - r).abs() <= 1e-9 * r);
            prop_assert!((p.up - (c.up + h)).abs() <= 1e-9 * r.max(h));
        }
        Ok(())
    });
}

fn elevator_fixity() {
    let cases = (
        1.0..100.0f64,
        0.0..360.0f64,
        1.0..100.0f64,
        1.0..100.0f64,
        0.5..10.0f64,
        point(),
    );
    check(50, cases, |(d, bearing, h0, h1, speed, target)| {
        prop_assume!((h0 - h1).abs() > 0.5);
        let params = ShotParams::Elevator {
            distance: d,
            bearing,
            start_height: h0,
            end_height: h1,
        };
        let traj = generate_shot(&spec(params, speed), &move |_| target, 0.05).unwrap();
        let first = traj.samples[0].pose.position;
        prop_assert!(((first.east - target.east).hypot(first.north - target.north) - d).abs() < 1e-9 * d);
        for s in &traj.samples {
            let p = s.pose.position;
            prop_assert!((p.east - first.east).abs() <= 1e-12 && (p.north - first.north).abs() <= 1e-12);
        }
        Ok(())
    });
}

/// Closest horizontal approach of a sampled path to a point, treating the
/// samples as a polyline.
fn closest_approach(points: &[EnuPoint], target: &EnuPoint) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (ex, ny) = (b.east - a.east, b.north - a.north);
            let (tx, ty) = (target.east - a.east, target.north - a.north);
            let len2 = ex * ex + ny * ny;
            let u = if len2 == 0.0 {
                0.0
            } else {
                ((tx * ex + ty * ny) / len2).clamp(0.0, 1.0)
            };
            (tx - u * ex).hypot(ty - u * ny)
        })
        .fold(f64::INFINITY, f64::min)
}

fn flyby_offset() {
    let cases = (
        1.0..80.0f64,
        10.0..300.0f64,
        1.0..60.0f64,
        0.0..360.0f64,
        1.0..25.0f64,
        point(),
    );
    check(50, cases, |(offset, leg, h, bearing, speed, target)| {
        let params = ShotParams::Flyby {
            offset,
            leg_length: leg,
            height: h,
            bearing,
        };
        let traj = generate_shot(&spec(params, speed), &move |_| target, 0.05).unwrap();
        let points: Vec<EnuPoint> = traj.samples.iter().map(|s| s.pose.position).collect();
        prop_assert!((closest_approach(&points, &target) - offset).abs() <= 1e-9);
        Ok(())
    });
}

fn chase_steady_state() {
    let cases = (
        2.0..10.0f64,
        10.0..20.0f64,
        3.0..30.0f64,
        2.0..25.0f64,
        0.0..360.0f64,
        point(),
        velocity(20.0),
    );
    check(50, cases, |(v, margin, fd, h, heading, start, offset)| {
        let dir = EnuPoint::new(heading.to_radians().sin(), heading.to_radians().cos(), 0.0);
        let path = move |t: f64| start + dir * (v * t);
        let params = ShotParams::Chase {
            follow_distance: fd,
            height: h,
            duration: 12.0,
            start: Some(start - dir * fd + EnuPoint::new(0.0, 0.0, h) + offset),
        };
        let traj = generate_shot(&spec(params, v + margin), &path, 0.05).unwrap();
        let slant = fd.hypot(h);
        for s in traj.samples.iter().filter(|s| s.time >= 5.0) {
            let target = path(s.time);
            let ideal = target - dir * fd + EnuPoint::new(0.0, 0.0, h);
            prop_assert!(s.pose.position.distance(&ideal) <= 1e-6);
            prop_assert!((s.pose.position.distance(&target) - slant).abs() <= 1e-6);
        }
        Ok(())
    });
}

/// Share of the image width taken by a face-on object of `width` metres.
fn width_share(cam: &CameraIntrinsics, distance: f64, width: f64) -> f64 {
    (width / distance) / (cam.sensor_width() / cam.focal_length())
}

fn rescale_invariance() {
    let types = prop::sample::select(vec![
        ShotType::Establish,
        ShotType::Chase,
        ShotType::Flyby,
        ShotType::Elevator,
        ShotType::Orbit,
    ]);
    let cases = (types, camera(5.0..60.0, 4.0..200.0), 0.5..5.0f64);
    check(100, cases, |(ty, cam, width)| {
        let reference = ReferenceSetup::default();
        let nominal = ShotSpec {
            camera: reference.camera,
            ..ShotSpec::new(
                ty,
                TargetRef::StaticPoint {
                    point: EnuPoint::ORIGIN,
                },
            )
        };
        let actual = rescale_shot_params(&ShotSpec { camera: cam, ..nominal }, &reference);
        let path = |t: f64| EnuPoint::new(2.0 * t, t, 0.0);
        let a = generate_shot(&nominal, &path, 0.05).unwrap();
        let b = generate_shot(&actual, &path, 0.05).unwrap();
        let d_ref = a.samples[0].pose.position.distance(&path(0.0));
        let d_act = b.samples[0].pose.position.distance(&path(0.0));
        let expect = width_share(&reference.camera, d_ref, width);
        prop_assert!(rel_err(width_share(&cam, d_act, width), expect) <= 1e-9);
        Ok(())
    });
}

pub fn run() {
    orbit_radius();
    elevator_fixity();
    flyby_offset();
    chase_steady_state();
    rescale_invariance();
}
