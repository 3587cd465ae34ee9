use dronecine_core::flightplan::{
    export_capture_manifest, export_litchi_csv, export_qgc_plan, import_qgc_plan, FlightPlan, Waypoint,
};
use dronecine_core::geometry::{EnuPoint, GeoOrigin, Pose};
use dronecine_core::project::{load_project, save_project, DroneConfig, Project, ScanEntry, SceneMetadata};
use dronecine_core::scan::{plan_scan, ScanArea, ScanConfig};
use dronecine_core::shot::{ShotSpec, ShotType, TargetRef};
use dronecine_core::sim::{Actor, ActorKind, Wind};
use proptest::prelude::*;

use crate::support::{camera, check};

const EARTH_RADIUS: f64 = 6_378_137.0;

fn origin() -> impl Strategy<Value = GeoOrigin> {
    (-70.0..70.0f64, -179.0..179.0f64, -100.0..3000.0f64).prop_map(|(la, lo, al)| GeoOrigin::new(la, lo, al).unwrap())
}

fn enu(span: f64, low: f64, high: f64) -> impl Strategy<Value = EnuPoint> {
    (-span..span, -span..span, low..high).prop_map(|(e, n, u)| EnuPoint::new(e, n, u))
}

fn ground(span: f64) -> impl Strategy<Value = EnuPoint> {
    (-span..span, -span..span).prop_map(|(e, n)| EnuPoint::new(e, n, 0.0))
}

fn waypoint() -> impl Strategy<Value = Waypoint> {
    (
        enu(3000.0, 1.0, 400.0),
        0.1..25.0f64,
        0.0..360.0f64,
        -30.0..=90.0f64,
        any::<bool>(),
    )
        .prop_map(|(position, speed, heading, gimbal_pitch, capture)| Waypoint {
            position,
            speed,
            heading,
            gimbal_pitch,
            capture,
        })
}

fn flight_plan() -> impl Strategy<Value = FlightPlan> {
    (origin(), prop::collection::vec(waypoint(), 1..30)).prop_map(|(o, w)| FlightPlan::new(o, w).unwrap())
}

fn actor() -> impl Strategy<Value = (ActorKind, Vec<EnuPoint>, f64, bool)> {
    (
        prop::sample::select(vec![ActorKind::Car, ActorKind::Cyclist, ActorKind::Boat]),
        prop::collection::vec(ground(500.0), 2..6),
        0.5..30.0f64,
        any::<bool>(),
    )
}

fn drone() -> impl Strategy<
    Value = (
        Pose,
        bool,
        Option<FlightPlan>,
        dronecine_core::geometry::CameraIntrinsics,
    ),
> {
    (
        (enu(200.0, 1.0, 120.0), 0.0..360.0f64, -30.0..=90.0f64).prop_map(|(p, y, g)| Pose::new(p, y, g).unwrap()),
        any::<bool>(),
        prop::option::of(flight_plan()),
        camera(5.0..40.0, 4.0..100.0),
    )
}

fn project() -> impl Strategy<Value = Project> {
    (
        (
            origin(),
            "[a-z ]{0,12}",
            enu(8.0, -1.0, 1.0),
            0.0..4.0f64,
            1.0..30.0f64,
            any::<u64>(),
        ),
        (0.0..24.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..20.0f64),
        prop::collection::vec(actor(), 0..4),
        prop::collection::vec(drone(), 0..4),
        prop::collection::vec(
            (ground(100.0), 5.0..40.0f64, 5.0..40.0f64, -90.0..90.0f64, any::<bool>()),
            0..3,
        ),
    )
        .prop_map(
            |((origin, name, mean, gust, period, seed), (tod, light, cloud, cloud_speed), actors, drones, scans)| {
                let mut p = Project {
                    name,
                    origin,
                    wind: Wind {
                        mean,
                        gust_amplitude: gust,
                        gust_period: period,
                        phase_seed: seed,
                    },
                    scene: SceneMetadata {
                        time_of_day: tod,
                        lighting: light,
                        cloud_thickness: cloud,
                        cloud_speed,
                    },
                    ..Project::default()
                };
                for (kind, path, speed, looped) in actors {
                    let id = p.next_entity_id();
                    p.actors.push(Actor::new(id, kind, path, speed, looped).unwrap());
                }
                for (home, follows, plan, cam) in drones {
                    let mut d = DroneConfig::new(p.next_entity_id(), home);
                    d.camera = cam;
                    d.flight_plan = plan;
                    if follows && !p.actors.is_empty() {
                        d.shot = Some(ShotSpec::new(
                            ShotType::Orbit,
                            TargetRef::Actor {
                                actor_id: p.actors[0].id,
                            },
                        ));
                    }
                    p.drones.push(d);
                }
                for (corner, lx, ly, rotation, planned) in scans {
                    let area = ScanArea {
                        origin_corner: corner,
                        length_x: lx,
                        length_y: ly,
                        rotation,
                    };
                    let config = ScanConfig {
                        in_track_overlap: 0.5,
                        cross_track_overlap: 0.5,
                        base_height: 30.0,
                        ..ScanConfig::default()
                    };
                    let plan = planned.then(|| plan_scan(&area, &config).unwrap());
                    p.scans.push(ScanEntry {
                        id: p.next_scan_id(),
                        area,
                        config,
                        plan,
                        overlap: None,
                    });
                }
                p
            },
        )
}

fn golden_plan() -> FlightPlan {
    let origin = GeoOrigin::new(51.45, -2.6, 12.0).unwrap();
    let wp = |e: f64, n: f64, u: f64, heading: f64, gimbal_pitch: f64, capture: bool| Waypoint {
        position: EnuPoint::new(e, n, u),
        speed: 5.0,
        heading,
        gimbal_pitch,
        capture,
    };
    FlightPlan::new(
        origin,
        vec![
            wp(0.0, 0.0, 20.0, 0.0, 35.0, false),
            wp(100.0, 50.0, 35.5, 63.43, 60.0, true),
            wp(-25.25, 120.0, 18.0, 347.5, 90.0, true),
            wp(-40.0, -80.0, 5.0, 180.0, -15.0, false),
        ],
    )
    .unwrap()
}

fn litchi_contract() {
    let csv = export_litchi_csv(&golden_plan()).unwrap();
    let golden = include_str!("../fixtures/litchi_golden.csv");
    assert_eq!(csv, golden);

    let mut lines = golden.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(
        header,
        [
            "latitude",
            "longitude",
            "altitude(m)",
            "heading(deg)",
            "curvesize(m)",
            "rotationdir",
            "gimbalmode",
            "gimbalpitchangle",
            "actiontype1"
        ]
    );
    // second waypoint, 100 m east and 50 m north of the origin
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    let lat = 51.45 + (50.0 / EARTH_RADIUS).to_degrees();
    let lon = -2.6 + (100.0 / (EARTH_RADIUS * 51.45f64.to_radians().cos())).to_degrees();
    assert_eq!(row[0], format!("{lat:.7}"));
    assert_eq!(row[1], format!("{lon:.7}"));
    assert_eq!(&row[2..], ["35.50", "63.43", "0", "0", "2", "-60.00", "1"]);
    assert!(golden.lines().skip(1).all(|l| l.split(',').count() == 9));
}

pub fn run() {
    check(200, flight_plan(), |plan| {
        let bytes = export_qgc_plan(&plan).unwrap();
        prop_assert_eq!(&export_qgc_plan(&plan).unwrap(), &bytes);
        let back = import_qgc_plan(&bytes).unwrap();
        prop_assert_eq!(back.origin, plan.origin);
        prop_assert_eq!(back.waypoints.len(), plan.waypoints.len());
        for (a, b) in plan.waypoints.iter().zip(&back.waypoints) {
            prop_assert!(
                a.position.distance(&b.position) <= 1e-6,
                "{:?} vs {:?}",
                a.position,
                b.position
            );
            prop_assert_eq!(
                (a.speed, a.heading, a.gimbal_pitch, a.capture),
                (b.speed, b.heading, b.gimbal_pitch, b.capture)
            );
        }
        prop_assert_eq!(export_litchi_csv(&plan).unwrap(), export_litchi_csv(&plan).unwrap());
        Ok(())
    });

    check(200, project(), |project| {
        let bytes = save_project(&project).unwrap();
        let back = load_project(&bytes).unwrap();
        prop_assert_eq!(&back, &project);
        prop_assert_eq!(save_project(&back).unwrap(), bytes);
        for scan in project.scans.iter().filter_map(|s| s.plan.as_ref()) {
            prop_assert_eq!(
                export_capture_manifest(scan, &project.origin).unwrap(),
                export_capture_manifest(scan, &project.origin).unwrap()
            );
        }
        Ok(())
    });

    litchi_contract();
}
