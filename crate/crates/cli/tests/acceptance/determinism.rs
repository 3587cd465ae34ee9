use dronecine_core::geometry::{EnuPoint, Pose};
use dronecine_core::project::{load_project, save_project, world_from_project, DroneConfig, Project};
use dronecine_core::shot::{ShotParams, ShotSpec, ShotType, TargetRef};
use dronecine_core::sim::{
    simulate, ticks_for, Actor, ActorKind, ControlInput, ControlRecord, SimSettings, Terrain, Wind,
};

fn scenario() -> Vec<u8> {
    let terrain = Terrain::from_fn(-200.0, -200.0, 10.0, 41, 41, |e, n| {
        8.0 * (e / 60.0).sin() * (n / 45.0).cos() + 0.02 * e
    })
    .unwrap();
    let mut project = Project {
        name: "determinism".into(),
        terrain: Some(terrain),
        wind: Wind {
            mean: EnuPoint::new(3.0, -1.5, 0.2),
            gust_amplitude: 2.5,
            gust_period: 7.0,
            phase_seed: 42,
        },
        ..Project::default()
    };
    let path = |pts: &[(f64, f64)]| pts.iter().map(|&(e, n)| EnuPoint::new(e, n, 0.0)).collect::<Vec<_>>();
    project.actors = vec![
        Actor::new(
            1,
            ActorKind::Car,
            path(&[(-150.0, -50.0), (150.0, -50.0), (150.0, 80.0)]),
            9.0,
            true,
        )
        .unwrap(),
        Actor::new(2, ActorKind::Cyclist, path(&[(0.0, -120.0), (10.0, 120.0)]), 4.5, false).unwrap(),
        Actor::new(
            3,
            ActorKind::Boat,
            path(&[(-100.0, 100.0), (100.0, 140.0), (-80.0, 160.0)]),
            3.0,
            true,
        )
        .unwrap(),
    ];

    let mut camera_ship = DroneConfig::new(4, Pose::default());
    camera_ship.shot = Some(ShotSpec {
        speed: 12.0,
        params: ShotParams::Chase {
            follow_distance: 12.0,
            height: 15.0,
            duration: 60.0,
            start: None,
        },
        ..ShotSpec::new(ShotType::Chase, TargetRef::Actor { actor_id: 1 })
    });
    project.drones.push(camera_ship);
    // the manual drone starts low over the cyclist's line
    project.drones.push(DroneConfig::new(
        5,
        Pose::new(EnuPoint::new(2.0, -110.0, 9.0), 0.0, 20.0).unwrap(),
    ));
    project.generate_drone_shot(4, 0.05).unwrap();
    save_project(&project).unwrap()
}

fn controls() -> Vec<ControlRecord> {
    (0..1200u64)
        .map(|tick| {
            let t = tick as f64 * 0.05;
            let input = ControlInput {
                forward: (t / 7.0).sin(),
                right: 0.5 * (t / 3.0).cos(),
                climb: if t < 10.0 { -0.4 } else { 0.3 * (t / 11.0).sin() },
                yaw_rate: 0.2,
                gimbal_rate: 0.1 * (t / 5.0).sin(),
            };
            ControlRecord::new(tick, 5, input)
        })
        .collect()
}

fn run_once(document: &[u8], log: &[ControlRecord]) -> (Vec<u8>, Vec<u8>) {
    let project = load_project(document).unwrap();
    let mut world = world_from_project(&project, SimSettings::default()).unwrap();
    let ticks = ticks_for(&world, 60.0);
    assert_eq!(ticks, 1200);
    let run = simulate(&mut world, ticks, log).unwrap();
    assert_eq!(run.trace.len(), 1201);
    assert_eq!(run.trace[1200].drones.len(), 2);
    assert_eq!(run.trace[1200].actors.len(), 3);
    (
        serde_json::to_vec(&run.trace).unwrap(),
        serde_json::to_vec(&run.events).unwrap(),
    )
}

pub fn run() {
    let document = scenario();
    let log = controls();
    let (trace_a, events_a) = run_once(&document, &log);
    let (trace_b, events_b) = run_once(&document, &log);
    assert!(trace_a == trace_b, "traces differ");
    assert!(events_a == events_b, "event lists differ");
    assert_ne!(events_a, b"[]", "scenario should raise events");

    // the wind actually moves the manual drone
    let calm = {
        let mut p = load_project(&document).unwrap();
        p.wind = Wind::calm();
        save_project(&p).unwrap()
    };
    assert_ne!(run_once(&calm, &log).0, trace_a);
}
