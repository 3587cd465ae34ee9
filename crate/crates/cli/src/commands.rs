use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use dronecine_client::Client;
use dronecine_core::flightplan::{
    export_capture_manifest, export_litchi_csv, export_qgc_plan, import_qgc_plan, FlightPlan,
};
use dronecine_core::geometry::{CameraIntrinsics, EnuPoint, GeoOrigin, Pose};
use dronecine_core::project::{load_project, shot_coverage, world_from_project, DroneConfig, Project};
use dronecine_core::scan::{plan_scan, verify_overlap, OverlapMode, ScanArea, ScanConfig, ScanPlan};
use dronecine_core::shot::{generate_shot, ShotParams, ShotSpec, ShotType, TargetRef, Trajectory};
use dronecine_core::sim::{read_control_log, simulate, ticks_for, SimSettings};
use dronecine_protocol::{Clock, CreateSessionRequest, ExportFormat, ExportQuery, PlanSource, RunSummary};
use dronecine_service::SessionModel;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::args::*;
use crate::error::{Failure, Outcome};

/// Output of `shot --output`, input of `simulate --shot` and `export --from shot`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotFile {
    pub spec: ShotSpec,
    pub trajectory: Trajectory,
}

fn read(path: &Path) -> Outcome<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::invalid(e.to_string()))?;
    bytes.push(b'\n');
    write(path, &bytes)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let bytes = read(path)?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Failure::invalid(format!("{}: invalid `{field}`: {}", path.display(), e.into_inner()))
    })
}

fn read_project(path: &Path) -> Outcome<Project> {
    load_project(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn origin(args: &OriginArgs) -> Outcome<GeoOrigin> {
    Ok(GeoOrigin::new(
        args.origin_latitude_deg,
        args.origin_longitude_deg,
        args.origin_altitude_m,
    )?)
}

fn camera(args: &CameraArgs) -> Outcome<CameraIntrinsics> {
    Ok(CameraIntrinsics::new(
        args.sensor_width_mm,
        args.sensor_height_mm,
        args.focal_length_mm,
    )?)
}

pub fn plan_scan_cmd(args: &PlanScanArgs) -> Outcome {
    let area = ScanArea {
        origin_corner: EnuPoint::new(
            args.origin_corner_east_m,
            args.origin_corner_north_m,
            args.origin_corner_up_m,
        ),
        length_x: args.length_x_m,
        length_y: args.length_y_m,
        rotation: args.rotation_deg,
    };
    let pitches: [f64; 3] = args
        .gimbal_pitch_per_layer_deg
        .as_slice()
        .try_into()
        .map_err(|_| Failure::invalid("`--gimbal-pitch-per-layer-deg` needs exactly three values"))?;
    let config = ScanConfig {
        base_height: args.base_height_m,
        avg_building_height: args.avg_building_height_m,
        max_building_height: args.max_building_height_m,
        in_track_overlap: args.in_track_overlap,
        cross_track_overlap: args.cross_track_overlap,
        gimbal_pitch_per_layer: pitches,
        camera: camera(&args.camera)?,
        cruise_speed: args.cruise_speed_mps,
        both_directions: args.both_directions,
    };
    let origin = origin(&args.origin)?;
    let plan = plan_scan(&area, &config)?;
    for layer in &plan.layers {
        println!("layer {:.2} m: {} images", layer.height, layer.image_count());
    }
    println!("total images: {}", plan.total_image_count);
    if let Some(path) = &args.output {
        write_json(path, &plan)?;
    }
    if let Some(path) = &args.manifest {
        write(path, export_capture_manifest(&plan, &origin)?.as_bytes())?;
    }
    Ok(())
}

fn shot_type(kind: ShotKind) -> ShotType {
    match kind {
        ShotKind::Establish => ShotType::Establish,
        ShotKind::Chase => ShotType::Chase,
        ShotKind::Flyby => ShotType::Flyby,
        ShotKind::Elevator => ShotType::Elevator,
        ShotKind::Orbit => ShotType::Orbit,
    }
}

/// Stock parameters for the shot type with the given flags overriding
/// fields of the same name.
fn shot_params(args: &ShotArgs) -> Outcome<ShotParams> {
    let ty = shot_type(args.shot_type);
    let overrides = [
        ("--radius-m", "radius", args.radius_m),
        ("--height-m", "height", args.height_m),
        ("--start-azimuth-deg", "start_azimuth", args.start_azimuth_deg),
        ("--arc-deg", "arc", args.arc_deg),
        ("--follow-distance-m", "follow_distance", args.follow_distance_m),
        ("--duration-s", "duration", args.duration_s),
        ("--offset-m", "offset", args.offset_m),
        ("--leg-length-m", "leg_length", args.leg_length_m),
        ("--bearing-deg", "bearing", args.bearing_deg),
        ("--distance-m", "distance", args.distance_m),
        ("--start-distance-m", "start_distance", args.start_distance_m),
        ("--end-distance-m", "end_distance", args.end_distance_m),
        ("--start-height-m", "start_height", args.start_height_m),
        ("--end-height-m", "end_height", args.end_height_m),
    ];
    let mut value = serde_json::to_value(ShotParams::defaults(ty)).expect("shot params serialize");
    let fields = value.as_object_mut().expect("shot params are an object");
    for (flag, key, v) in overrides {
        let Some(v) = v else { continue };
        match fields.get_mut(key) {
            Some(slot) => *slot = serde_json::json!(v),
            None => {
                return Err(Failure::invalid(format!(
                    "`{flag}` does not apply to {} shots",
                    fields["shot_type"].as_str().unwrap_or_default()
                )))
            }
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::invalid(e.to_string()))
}

pub fn shot_cmd(args: &ShotArgs) -> Outcome {
    let project = args.project.as_deref().map(read_project).transpose()?;
    let target = match args.target_actor {
        Some(actor_id) => TargetRef::Actor { actor_id },
        None => TargetRef::StaticPoint {
            point: EnuPoint::new(args.target_east_m, args.target_north_m, args.target_up_m),
        },
    };
    let spec = ShotSpec {
        target,
        speed: args.speed_mps,
        camera: camera(&args.camera)?,
        params: shot_params(args)?,
    };
    spec.validate()?;
    let trajectory = match &project {
        Some(p) => generate_shot(&spec, &*p.target_path(&target)?, args.dt_s)?,
        None => {
            let TargetRef::StaticPoint { point } = target else {
                unreachable!("actor targets require --project")
            };
            generate_shot(&spec, &move |_| point, args.dt_s)?
        }
    };
    println!(
        "{:?} shot: {} samples over {:.2} s",
        spec.shot_type(),
        trajectory.samples.len(),
        trajectory.duration()
    );
    if let Some(path) = &args.plan {
        let origin = match &project {
            Some(p) => p.origin,
            None => origin(&args.origin)?,
        };
        let plan = FlightPlan::from_timed_poses(origin, &trajectory.timed_poses(), args.plan_interval_s)?;
        write(path, &export_qgc_plan(&plan)?)?;
    }
    if let Some(path) = &args.output {
        write_json(path, &ShotFile { spec, trajectory })?;
    }
    Ok(())
}

/// Adds one drone per shot file, flying the stored trajectory.
fn add_shot_drones(project: &mut Project, shots: &[std::path::PathBuf]) -> Outcome {
    for path in shots {
        let shot: ShotFile = read_json(path)?;
        let home: Pose = shot
            .trajectory
            .samples
            .first()
            .ok_or_else(|| Failure::invalid(format!("{}: trajectory has no samples", path.display())))?
            .pose;
        let mut drone = DroneConfig::new(project.next_entity_id(), home);
        drone.camera = shot.spec.camera;
        drone.shot = Some(shot.spec);
        drone.trajectory = Some(shot.trajectory);
        project.drones.push(drone);
    }
    project
        .validate()
        .map_err(|e| Failure::invalid(format!("project with shots: {e}")))
}

pub fn simulate_cmd(args: &SimulateArgs) -> Outcome {
    let mut project = match &args.project {
        Some(path) => read_project(path)?,
        None => Project::default(),
    };
    add_shot_drones(&mut project, &args.shot)?;
    let controls = match &args.controls {
        Some(path) => {
            let text = String::from_utf8(read(path)?)
                .map_err(|_| Failure::invalid(format!("{}: not UTF-8 text", path.display())))?;
            read_control_log(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?
        }
        None => Vec::new(),
    };
    if !(args.seconds.is_finite() && args.seconds >= 0.0) {
        return Err(Failure::invalid(format!(
            "`--seconds` must be a non-negative number, got {}",
            args.seconds
        )));
    }
    let mut world = world_from_project(&project, SimSettings::default())?;
    let ticks = ticks_for(&world, args.seconds);
    let run = simulate(&mut world, ticks, &controls)?;
    let summary = RunSummary {
        ticks,
        coverage: shot_coverage(&project, &run.trace),
        events: run.events,
        final_state: world.snapshot(),
    };

    println!("ticks: {ticks} ({:.2} s)", world.time());
    let mut by_kind = BTreeMap::new();
    for e in &summary.events {
        *by_kind.entry(format!("{:?}", e.kind)).or_insert(0usize) += 1;
    }
    println!("events: {}", summary.events.len());
    for (kind, n) in &by_kind {
        println!("  {kind}: {n}");
    }
    for c in &summary.coverage {
        println!(
            "drone {} coverage: {:.4} over {} frames",
            c.drone_id, c.coverage, c.frames
        );
    }

    if let Some(path) = &args.trace {
        let mut out = Vec::new();
        for snap in &run.trace {
            serde_json::to_writer(&mut out, snap).map_err(|e| Failure::invalid(e.to_string()))?;
            out.push(b'\n');
        }
        write(path, &out)?;
    }
    if let Some(path) = &args.events {
        write_json(path, &summary.events)?;
    }
    if let Some(path) = &args.summary {
        write_json(path, &summary)?;
    }
    Ok(())
}

pub fn verify_overlap_cmd(args: &VerifyOverlapArgs) -> Outcome {
    let plan: ScanPlan = read_json(&args.plan)?;
    let mode = match args.mode {
        Mode::Landscape => OverlapMode::Landscape,
        Mode::Detail => OverlapMode::Detail,
    };
    let report = verify_overlap(&plan, &plan.config.camera, mode)?;
    for layer in &report.layers {
        let cross = layer
            .min_cross_track
            .map_or_else(|| "n/a".to_string(), |c| format!("{c:.4}"));
        println!(
            "layer {:.2} m: in-track {:.4}, cross-track {cross}",
            layer.height, layer.min_in_track
        );
    }
    println!("threshold ({:?}): {:.2}", report.mode, report.threshold);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &args.output {
        write_json(path, &report)?;
    }
    if args.strict && !report.warnings.is_empty() {
        return Err(Failure::invalid(format!(
            "{} overlap warning(s)",
            report.warnings.len()
        )));
    }
    Ok(())
}

fn encode_plan(plan: &FlightPlan, to: OutputFormat) -> Outcome<Vec<u8>> {
    match to {
        OutputFormat::Qgc => Ok(export_qgc_plan(plan)?),
        OutputFormat::Litchi => Ok(export_litchi_csv(plan)?.into_bytes()),
        OutputFormat::Manifest => Err(Failure::invalid("`--to manifest` needs a scan plan input")),
    }
}

pub fn export_cmd(args: &ExportArgs) -> Outcome {
    let bytes = match args.from {
        InputFormat::Qgc => {
            let plan = import_qgc_plan(&read(&args.input)?)
                .map_err(|e| Failure::invalid(format!("{}: {e}", args.input.display())))?;
            encode_plan(&plan, args.to)?
        }
        InputFormat::Scan => {
            let plan: ScanPlan = read_json(&args.input)?;
            let origin = origin(&args.origin)?;
            match args.to {
                OutputFormat::Manifest => export_capture_manifest(&plan, &origin)?.into_bytes(),
                to => encode_plan(&FlightPlan::from_scan(origin, &plan)?, to)?,
            }
        }
        InputFormat::Shot => {
            let shot: ShotFile = read_json(&args.input)?;
            let plan =
                FlightPlan::from_timed_poses(origin(&args.origin)?, &shot.trajectory.timed_poses(), args.interval_s)?;
            encode_plan(&plan, args.to)?
        }
        InputFormat::Project => {
            let project = read_project(&args.input)?;
            let query = ExportQuery {
                format: match args.to {
                    OutputFormat::Qgc => ExportFormat::Qgc,
                    OutputFormat::Litchi => ExportFormat::Litchi,
                    OutputFormat::Manifest => ExportFormat::Manifest,
                },
                drone_id: args.drone,
                scan_id: args.scan,
                source: match args.source {
                    Source::Trajectory => PlanSource::Trajectory,
                    Source::FlightPlan => PlanSource::FlightPlan,
                    Source::Recorded => PlanSource::Recorded,
                },
                interval: Some(args.interval_s),
            };
            SessionModel::new(Uuid::nil(), project, Clock::Manual)?.export(&query)?
        }
    };
    write(&args.output, &bytes)?;
    println!("wrote {} bytes to {}", bytes.len(), args.output.display());
    Ok(())
}

fn runtime() -> Outcome<tokio::runtime::Runtime> {
    tokio::runtime::Runtime::new().map_err(|e| Failure::Io(format!("cannot start runtime: {e}")))
}

pub fn serve_cmd(args: &ServeArgs) -> Outcome {
    runtime()?
        .block_on(dronecine_service::serve(args.addr))
        .map_err(|e| Failure::Io(format!("{}: {e}", args.addr)))
}

pub fn remote_cmd(args: &RemoteArgs) -> Outcome {
    let client = Client::new(args.url.clone());
    runtime()?.block_on(async {
        match &args.command {
            RemoteCommand::Health => {
                println!("{}", client.health().await?);
            }
            RemoteCommand::Sessions => {
                for id in client.sessions().await? {
                    println!("{id}");
                }
            }
            RemoteCommand::Create { project } => {
                let project = project.as_deref().map(read_project).transpose()?;
                let info = client
                    .create_session(&CreateSessionRequest {
                        project,
                        clock: Clock::Realtime,
                    })
                    .await?;
                println!("{}", info.id);
            }
            RemoteCommand::Save { session, output } => {
                write(output, &client.project_document(*session).await?)?;
            }
            RemoteCommand::Run { session, seconds } => {
                let summary = client.run(*session, *seconds).await?;
                let mut out = std::io::stdout().lock();
                let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::invalid(e.to_string()))?;
                writeln!(out, "{text}").map_err(|e| Failure::Io(e.to_string()))?;
            }
        }
        Ok(())
    })
}
