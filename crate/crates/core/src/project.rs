//! Versioned scene persistence.
//!
//! A project is a single pretty-printed JSON document. Loading checks the
//! schema version before anything else, rejects fields this build does not
//! know, and verifies that every id reference resolves.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::flightplan::FlightPlan;
use crate::geometry::{point_in_frustum, CameraIntrinsics, EnuPoint, GeoOrigin, Pose};
use crate::scan::{plan_scan, verify_overlap, OverlapMode, OverlapReport, ScanArea, ScanConfig, ScanPlan};
use crate::shot::{generate_shot, ShotSpec, TargetRef, Trajectory};
use crate::sim::{Actor, DroneLimits, DroneMode, DroneSim, SimSettings, Terrain, Wind, World, WorldSnapshot};

pub const SCHEMA_VERSION: u32 = 1;

/// Visual-only scene options. They never influence planning or simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneMetadata {
    /// Hours since local midnight, `[0, 24)`.
    pub time_of_day: f64,
    /// Relative light level, `[0, 1]`.
    pub lighting: f64,
    /// `[0, 1]`
    pub cloud_thickness: f64,
    /// m/s
    pub cloud_speed: f64,
}

impl Default for SceneMetadata {
    fn default() -> Self {
        SceneMetadata {
            time_of_day: 12.0,
            lighting: 1.0,
            cloud_thickness: 0.2,
            cloud_speed: 2.0,
        }
    }
}

impl SceneMetadata {
    pub fn validate(&self) -> Result<()> {
        let in_range = |field: &str, v: f64, lo: f64, hi: f64, hi_open: bool| {
            ensure_finite(field, v)?;
            if v < lo || v > hi || (hi_open && v == hi) {
                return Err(Error::invalid(
                    field,
                    format!("{v} is outside [{lo}, {hi}{}", if hi_open { ")" } else { "]" }),
                ));
            }
            Ok(())
        };
        in_range("scene.time_of_day", self.time_of_day, 0.0, 24.0, true)?;
        in_range("scene.lighting", self.lighting, 0.0, 1.0, false)?;
        in_range("scene.cloud_thickness", self.cloud_thickness, 0.0, 1.0, false)?;
        in_range("scene.cloud_speed", self.cloud_speed, 0.0, f64::MAX, false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneConfig {
    pub id: u32,
    #[serde(default)]
    pub name: String,
    pub camera: CameraIntrinsics,
    #[serde(default)]
    pub limits: DroneLimits,
    /// Start pose when the drone has no trajectory.
    pub home: Pose,
    #[serde(default)]
    pub shot: Option<ShotSpec>,
    /// Generated from `shot`; flown in simulation when present.
    #[serde(default)]
    pub trajectory: Option<Trajectory>,
    /// Flown in simulation when there is no trajectory.
    #[serde(default)]
    pub flight_plan: Option<FlightPlan>,
    /// Last free-play recording, downsampled for editing.
    #[serde(default)]
    pub recorded_path: Option<FlightPlan>,
}

impl DroneConfig {
    pub fn new(id: u32, home: Pose) -> Self {
        DroneConfig {
            id,
            name: format!("drone-{id}"),
            camera: CameraIntrinsics::reference(),
            limits: DroneLimits::default(),
            home,
            shot: None,
            trajectory: None,
            flight_plan: None,
            recorded_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanEntry {
    pub id: u32,
    pub area: ScanArea,
    pub config: ScanConfig,
    #[serde(default)]
    pub plan: Option<ScanPlan>,
    /// Result of the last overlap verification of `plan`.
    #[serde(default)]
    pub overlap: Option<OverlapReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Project {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub origin: GeoOrigin,
    #[serde(default)]
    pub terrain: Option<Terrain>,
    #[serde(default)]
    pub wind: Wind,
    #[serde(default)]
    pub actors: Vec<Actor>,
    #[serde(default)]
    pub drones: Vec<DroneConfig>,
    #[serde(default)]
    pub scans: Vec<ScanEntry>,
    #[serde(default)]
    pub scene: SceneMetadata,
}

impl Default for Project {
    fn default() -> Self {
        Project {
            schema_version: SCHEMA_VERSION,
            name: String::new(),
            origin: GeoOrigin::default(),
            terrain: None,
            wind: Wind::calm(),
            actors: Vec::new(),
            drones: Vec::new(),
            scans: Vec::new(),
            scene: SceneMetadata::default(),
        }
    }
}

fn duplicate(kind: &str, id: u32) -> Error {
    Error::Integrity {
        id: id.to_string(),
        context: format!("duplicate {kind} id"),
    }
}

impl Project {
    pub fn actor(&self, id: u32) -> Option<&Actor> {
        self.actors.iter().find(|a| a.id == id)
    }

    pub fn drone(&self, id: u32) -> Option<&DroneConfig> {
        self.drones.iter().find(|d| d.id == id)
    }

    pub fn drone_mut(&mut self, id: u32) -> Option<&mut DroneConfig> {
        self.drones.iter_mut().find(|d| d.id == id)
    }

    pub fn scan(&self, id: u32) -> Option<&ScanEntry> {
        self.scans.iter().find(|s| s.id == id)
    }

    /// Smallest unused id among actors and drones (they share one
    /// namespace so events can name either unambiguously).
    pub fn next_entity_id(&self) -> u32 {
        self.actors
            .iter()
            .map(|a| a.id)
            .chain(self.drones.iter().map(|d| d.id))
            .max()
            .map_or(1, |m| m + 1)
    }

    pub fn next_scan_id(&self) -> u32 {
        self.scans.iter().map(|s| s.id).max().map_or(1, |m| m + 1)
    }

    /// Checks ranges and that every reference resolves.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Version(format!(
                "schema_version {} is not supported (this build reads version {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.wind.validate()?;
        self.scene.validate()?;
        let mut ids = BTreeSet::new();
        for a in &self.actors {
            if !ids.insert(a.id) {
                return Err(duplicate("actor", a.id));
            }
            a.validate()?;
            if let Some(t) = &self.terrain {
                a.validate_on(t)?;
            }
        }
        for (i, d) in self.drones.iter().enumerate() {
            if !ids.insert(d.id) {
                return Err(duplicate("drone", d.id));
            }
            d.limits.validate()?;
            d.home.position.validate(&format!("drones[{i}].home.position"))?;
            if let Some(shot) = &d.shot {
                shot.validate()?;
                if let TargetRef::Actor { actor_id } = shot.target {
                    if self.actor(actor_id).is_none() {
                        return Err(Error::Integrity {
                            id: actor_id.to_string(),
                            context: format!("drones[{i}].shot.target.actor_id names no actor"),
                        });
                    }
                }
            }
            for plan in d.flight_plan.iter().chain(&d.recorded_path) {
                plan.validate()?;
            }
        }
        let mut scan_ids = BTreeSet::new();
        for s in &self.scans {
            if !scan_ids.insert(s.id) {
                return Err(duplicate("scan", s.id));
            }
            s.area.validate()?;
            s.config.validate()?;
        }
        Ok(())
    }

    /// Drones whose shot follows the given actor.
    pub fn actor_dependents(&self, actor_id: u32) -> Vec<u32> {
        self.drones
            .iter()
            .filter(
                |d| matches!(d.shot, Some(ShotSpec { target: TargetRef::Actor { actor_id: a }, .. }) if a == actor_id),
            )
            .map(|d| d.id)
            .collect()
    }

    /// Position of a shot target as a function of time from simulation start.
    pub fn target_path(&self, target: &TargetRef) -> Result<Box<dyn Fn(f64) -> EnuPoint + '_>> {
        match *target {
            TargetRef::StaticPoint { point } => Ok(Box::new(move |_| point)),
            TargetRef::Actor { actor_id } => {
                let actor = self.actor(actor_id).ok_or_else(|| Error::Integrity {
                    id: actor_id.to_string(),
                    context: "shot target names no actor".into(),
                })?;
                Ok(Box::new(move |t| actor.position_after(t)))
            }
        }
    }

    /// Generates the drone's shot trajectory and attaches it to the drone.
    pub fn generate_drone_shot(&mut self, drone_id: u32, dt: f64) -> Result<&Trajectory> {
        let drone = self
            .drone(drone_id)
            .ok_or_else(|| Error::invalid("drone_id", format!("no drone {drone_id}")))?;
        let spec = drone
            .shot
            .ok_or_else(|| Error::invalid("shot", format!("drone {drone_id} has no shot spec")))?;
        let trajectory = {
            let path = self.target_path(&spec.target)?;
            generate_shot(&spec, &*path, dt)?
        };
        let drone = self.drone_mut(drone_id).expect("checked above");
        drone.trajectory = Some(trajectory);
        Ok(drone.trajectory.as_ref().expect("just set"))
    }

    /// Generates the scan's plan and attaches it to the entry.
    pub fn generate_scan(&mut self, scan_id: u32) -> Result<&ScanPlan> {
        let entry = self
            .scans
            .iter_mut()
            .find(|s| s.id == scan_id)
            .ok_or_else(|| Error::invalid("scan_id", format!("no scan {scan_id}")))?;
        entry.plan = Some(plan_scan(&entry.area, &entry.config)?);
        entry.overlap = None;
        Ok(entry.plan.as_ref().expect("just set"))
    }

    /// Verifies the scan's generated plan and attaches the report.
    pub fn verify_scan(&mut self, scan_id: u32, mode: OverlapMode) -> Result<&OverlapReport> {
        let entry = self
            .scans
            .iter_mut()
            .find(|s| s.id == scan_id)
            .ok_or_else(|| Error::invalid("scan_id", format!("no scan {scan_id}")))?;
        let plan = entry
            .plan
            .as_ref()
            .ok_or_else(|| Error::invalid("scan_id", format!("scan {scan_id} has no generated plan")))?;
        entry.overlap = Some(verify_overlap(plan, &plan.config.camera, mode)?);
        Ok(entry.overlap.as_ref().expect("just set"))
    }
}

/// Serializes a validated project to its document form.
pub fn save_project(project: &Project) -> Result<Vec<u8>> {
    project.validate()?;
    let mut out = serde_json::to_vec_pretty(project).map_err(|e| Error::Export(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Parses and validates a project document.
pub fn load_project(bytes: &[u8]) -> Result<Project> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    let version = value
        .get("schema_version")
        .ok_or_else(|| Error::Version("document has no schema_version".into()))?;
    match version.as_u64() {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) if v > SCHEMA_VERSION as u64 => {
            return Err(Error::Version(format!(
                "schema_version {v} is newer than the supported version {SCHEMA_VERSION}"
            )))
        }
        _ => {
            return Err(Error::Version(format!(
                "schema_version {version} is not supported (this build reads version {SCHEMA_VERSION})"
            )))
        }
    }
    let project: Project = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        if inner.starts_with("unknown field") {
            Error::Version(format!("{path}: {inner}; the document was written by a newer schema"))
        } else {
            Error::Parse(format!("{path}: {inner}"))
        }
    })?;
    project.validate()?;
    Ok(project)
}

/// Builds the simulation world for a project. Drones with a trajectory fly
/// it from t = 0, drones with only a flight plan fly the plan, and the rest
/// hover at home under manual control.
pub fn world_from_project(project: &Project, settings: SimSettings) -> Result<World> {
    project.validate()?;
    let drones = project
        .drones
        .iter()
        .map(|d| {
            let (mode, start) = match (&d.trajectory, &d.flight_plan) {
                (Some(traj), _) if !traj.samples.is_empty() => (
                    DroneMode::FollowTrajectory {
                        trajectory: traj.clone(),
                        start_time: 0.0,
                    },
                    traj.samples[0].pose,
                ),
                (_, Some(plan)) => {
                    let wp = plan.waypoints[0];
                    (
                        DroneMode::FollowPlan {
                            plan: plan.clone(),
                            next_waypoint: 0,
                        },
                        Pose::new(wp.position, wp.heading, wp.gimbal_pitch)?,
                    )
                }
                _ => (DroneMode::Manual, d.home),
            };
            Ok(DroneSim::new(d.id, d.camera, d.limits, mode, start))
        })
        .collect::<Result<Vec<_>>>()?;
    let world = World {
        settings,
        tick: 0,
        terrain: project.terrain.clone(),
        wind: project.wind,
        actors: project.actors.clone(),
        drones,
        pending_controls: Default::default(),
    };
    world.validate()?;
    Ok(world)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotCoverage {
    pub drone_id: u32,
    pub target: TargetRef,
    /// Fraction of trace snapshots with the target inside the frustum.
    pub coverage: f64,
    pub frames: usize,
}

/// Landmark coverage of every drone with a shot over a simulated trace.
/// Actor targets are looked up in each snapshot, so the check uses the
/// simulated actor positions rather than the planned ones.
pub fn shot_coverage(project: &Project, trace: &[WorldSnapshot]) -> Vec<ShotCoverage> {
    project
        .drones
        .iter()
        .filter_map(|d| d.shot.map(|s| (d, s)))
        .map(|(d, shot)| {
            let (mut seen, mut frames) = (0usize, 0usize);
            for snap in trace {
                let Some(drone) = snap.drones.iter().find(|x| x.id == d.id) else {
                    continue;
                };
                let target = match shot.target {
                    TargetRef::StaticPoint { point } => Some(point),
                    TargetRef::Actor { actor_id } => {
                        snap.actors.iter().find(|a| a.id == actor_id).map(|a| a.pose.position)
                    }
                };
                let Some(target) = target else { continue };
                frames += 1;
                if point_in_frustum(&drone.pose, &drone.camera, &target).unwrap_or(false) {
                    seen += 1;
                }
            }
            ShotCoverage {
                drone_id: d.id,
                target: shot.target,
                coverage: if frames == 0 { 0.0 } else { seen as f64 / frames as f64 },
                frames,
            }
        })
        .collect()
}
