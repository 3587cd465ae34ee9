//! Synchronous session state machine. Every HTTP and stream operation is a
//! method here; the async layer only adds locking, clocks and transport.

use dronecine_core::flightplan::{export_capture_manifest, export_litchi_csv, export_qgc_plan, FlightPlan};
use dronecine_core::geometry::EnuPoint;
use dronecine_core::project::{save_project, shot_coverage, world_from_project, DroneConfig, Project, ScanEntry};
use dronecine_core::scan::{OverlapMode, OverlapReport, ScanPlan};
use dronecine_core::shot::{ShotParams, ShotSpec, TargetRef, Trajectory};
use dronecine_core::sim::{
    record_and_export, simulate, ticks_for, Actor, ControlInput, DroneMode, DroneState, SimEvent, SimSettings, World,
    WorldSnapshot,
};
use dronecine_protocol::{
    ActorDraft, ActorPatch, Clock, DroneDraft, DronePatch, EnvironmentPatch, ExportFormat, ExportQuery, PlanSource,
    RunState, RunSummary, ScanDraft, SessionInfo,
};
use uuid::Uuid;

use crate::error::ApiError;

/// Waypoint spacing for recordings and resampled trajectories, seconds.
pub const RECORD_INTERVAL: f64 = 1.0;

/// One tick's output.
#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub state: WorldSnapshot,
    pub events: Vec<SimEvent>,
}

#[derive(Debug, Clone)]
pub struct SessionModel {
    id: Uuid,
    clock: Clock,
    settings: SimSettings,
    project: Project,
    run_state: RunState,
    world: Option<World>,
    freeplay_drone: Option<u32>,
    total_ticks: u64,
}

fn conflict(action: &str, state: RunState) -> ApiError {
    ApiError::conflict(format!("cannot {action} while the session is {}", state_name(state)))
}

fn state_name(state: RunState) -> &'static str {
    match state {
        RunState::Editing => "editing",
        RunState::Running => "running",
        RunState::Paused => "paused",
        RunState::Freeplay => "in free play",
    }
}

impl SessionModel {
    pub fn new(id: Uuid, project: Project, clock: Clock) -> Result<Self, ApiError> {
        project.validate()?;
        Ok(SessionModel {
            id,
            clock,
            settings: SimSettings::default(),
            project,
            run_state: RunState::Editing,
            world: None,
            freeplay_drone: None,
            total_ticks: 0,
        })
    }

    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn clock(&self) -> Clock {
        self.clock
    }

    pub fn settings(&self) -> &SimSettings {
        &self.settings
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn run_state(&self) -> RunState {
        self.run_state
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    /// True while the clock should advance the world.
    pub fn is_live(&self) -> bool {
        matches!(self.run_state, RunState::Running | RunState::Freeplay)
    }

    pub fn tick(&self) -> u64 {
        self.world.as_ref().map_or(0, |w| w.tick)
    }

    pub fn info(&self) -> SessionInfo {
        SessionInfo {
            id: self.id,
            run_state: self.run_state,
            clock: self.clock,
            tick: self.tick(),
            total_ticks: self.total_ticks,
            freeplay_drone: self.freeplay_drone,
        }
    }

    pub fn snapshot(&self) -> Option<WorldSnapshot> {
        self.world.as_ref().map(World::snapshot)
    }

    // ---- editing -------------------------------------------------------

    /// Applies an edit to a copy of the project and keeps it only if the
    /// result validates, so a failed edit leaves the project untouched.
    fn edit<R>(&mut self, f: impl FnOnce(&mut Project) -> Result<R, ApiError>) -> Result<R, ApiError> {
        if self.run_state != RunState::Editing {
            return Err(conflict("edit the project", self.run_state));
        }
        let mut draft = self.project.clone();
        let out = f(&mut draft)?;
        draft.validate()?;
        self.project = draft;
        Ok(out)
    }

    pub fn replace_project(&mut self, project: Project) -> Result<(), ApiError> {
        self.edit(|p| {
            *p = project;
            Ok(())
        })
    }

    pub fn add_actor(&mut self, draft: ActorDraft) -> Result<Actor, ApiError> {
        self.edit(|p| {
            let id = draft.id.unwrap_or_else(|| p.next_entity_id());
            if p.actor(id).is_some() || p.drone(id).is_some() {
                return Err(ApiError::new(
                    dronecine_protocol::ErrorCode::Integrity,
                    Some("id".into()),
                    format!("id {id} is already in use"),
                ));
            }
            let actor = Actor::new(id, draft.kind, draft.path, draft.speed, draft.looped)?;
            p.actors.push(actor.clone());
            Ok(actor)
        })
    }

    pub fn update_actor(&mut self, id: u32, patch: ActorPatch) -> Result<Actor, ApiError> {
        self.edit(|p| {
            let actor = p
                .actors
                .iter_mut()
                .find(|a| a.id == id)
                .ok_or_else(|| ApiError::not_found("actor_id", format!("no actor {id}")))?;
            if let Some(kind) = patch.kind {
                actor.kind = kind;
            }
            if let Some(path) = patch.path {
                actor.path = path;
                actor.progress = 0.0;
            }
            if let Some(speed) = patch.speed {
                actor.speed = speed;
            }
            if let Some(looped) = patch.looped {
                actor.looped = looped;
            }
            let actor = actor.clone();
            // Trajectories framed on this actor no longer match its motion.
            for d in p.drones.iter_mut() {
                if matches!(d.shot, Some(ShotSpec { target: TargetRef::Actor { actor_id }, .. }) if actor_id == id) {
                    d.trajectory = None;
                }
            }
            Ok(actor)
        })
    }

    pub fn delete_actor(&mut self, id: u32) -> Result<(), ApiError> {
        self.edit(|p| {
            let before = p.actors.len();
            p.actors.retain(|a| a.id != id);
            if p.actors.len() == before {
                return Err(ApiError::not_found("actor_id", format!("no actor {id}")));
            }
            Ok(())
        })
    }

    pub fn add_drone(&mut self, draft: DroneDraft) -> Result<DroneConfig, ApiError> {
        self.edit(|p| {
            let id = draft.id.unwrap_or_else(|| p.next_entity_id());
            if p.actor(id).is_some() || p.drone(id).is_some() {
                return Err(ApiError::new(
                    dronecine_protocol::ErrorCode::Integrity,
                    Some("id".into()),
                    format!("id {id} is already in use"),
                ));
            }
            let mut drone = DroneConfig::new(id, draft.home);
            if let Some(name) = draft.name {
                drone.name = name;
            }
            if let Some(camera) = draft.camera {
                drone.camera = camera;
            }
            if let Some(limits) = draft.limits {
                drone.limits = limits;
            }
            p.drones.push(drone.clone());
            Ok(drone)
        })
    }

    pub fn update_drone(&mut self, id: u32, patch: DronePatch) -> Result<DroneConfig, ApiError> {
        self.edit(|p| {
            let drone = p
                .drone_mut(id)
                .ok_or_else(|| ApiError::not_found("drone_id", format!("no drone {id}")))?;
            if let Some(name) = patch.name {
                drone.name = name;
            }
            if let Some(limits) = patch.limits {
                drone.limits = limits;
            }
            if let Some(home) = patch.home {
                drone.home = home;
            }
            let shot_changed = patch.shot.is_some()
                || patch.shot_type.is_some()
                || patch.follow_target.is_some()
                || patch.speed.is_some()
                || patch.camera.is_some();
            if let Some(shot) = patch.shot {
                drone.shot = Some(shot);
            }
            if patch.shot_type.is_some() || patch.follow_target.is_some() || patch.speed.is_some() {
                let home = drone.home.position;
                let mut spec = drone.shot.unwrap_or_else(|| {
                    let target = patch.follow_target.unwrap_or(TargetRef::StaticPoint {
                        point: EnuPoint::new(home.east, home.north, 0.0),
                    });
                    let mut spec =
                        ShotSpec::new(patch.shot_type.unwrap_or(dronecine_core::shot::ShotType::Orbit), target);
                    spec.camera = drone.camera;
                    spec
                });
                if let Some(t) = patch.shot_type {
                    if t != spec.shot_type() {
                        spec.params = ShotParams::defaults(t);
                    }
                }
                if let Some(target) = patch.follow_target {
                    spec.target = target;
                }
                if let Some(speed) = patch.speed {
                    spec.speed = speed;
                }
                drone.shot = Some(spec);
            }
            if let Some(camera) = patch.camera {
                drone.camera = camera;
                if let Some(shot) = drone.shot.as_mut() {
                    shot.camera = camera;
                }
            }
            if shot_changed {
                drone.trajectory = None;
            }
            Ok(drone.clone())
        })
    }

    pub fn delete_drone(&mut self, id: u32) -> Result<(), ApiError> {
        self.edit(|p| {
            let before = p.drones.len();
            p.drones.retain(|d| d.id != id);
            if p.drones.len() == before {
                return Err(ApiError::not_found("drone_id", format!("no drone {id}")));
            }
            Ok(())
        })
    }

    pub fn set_waypoints(
        &mut self,
        id: u32,
        waypoints: Vec<dronecine_core::flightplan::Waypoint>,
    ) -> Result<FlightPlan, ApiError> {
        self.edit(|p| {
            let origin = p.origin;
            let drone = p
                .drone_mut(id)
                .ok_or_else(|| ApiError::not_found("drone_id", format!("no drone {id}")))?;
            let plan = FlightPlan::new(origin, waypoints)?;
            drone.flight_plan = Some(plan.clone());
            Ok(plan)
        })
    }

    pub fn update_environment(&mut self, patch: EnvironmentPatch) -> Result<(), ApiError> {
        self.edit(|p| {
            if patch.clear_terrain && patch.terrain.is_some() {
                return Err(ApiError::validation(
                    "clear_terrain",
                    "cannot both set and clear the terrain",
                ));
            }
            if let Some(w) = patch.wind {
                p.wind = w;
            }
            if patch.clear_terrain {
                p.terrain = None;
            }
            if let Some(t) = patch.terrain {
                p.terrain = Some(t);
            }
            if let Some(s) = patch.scene {
                p.scene = s;
            }
            Ok(())
        })
    }

    pub fn add_scan(&mut self, draft: ScanDraft) -> Result<ScanEntry, ApiError> {
        self.edit(|p| {
            let entry = ScanEntry {
                id: p.next_scan_id(),
                area: draft.area,
                config: draft.config,
                plan: None,
                overlap: None,
            };
            p.scans.push(entry.clone());
            Ok(entry)
        })
    }

    pub fn delete_scan(&mut self, id: u32) -> Result<(), ApiError> {
        self.edit(|p| {
            let before = p.scans.len();
            p.scans.retain(|s| s.id != id);
            if p.scans.len() == before {
                return Err(ApiError::not_found("scan_id", format!("no scan {id}")));
            }
            Ok(())
        })
    }

    pub fn generate_scan(&mut self, id: u32) -> Result<ScanPlan, ApiError> {
        self.edit(|p| {
            if p.scan(id).is_none() {
                return Err(ApiError::not_found("scan_id", format!("no scan {id}")));
            }
            Ok(p.generate_scan(id)?.clone())
        })
    }

    pub fn verify_overlap(&mut self, id: u32, mode: OverlapMode) -> Result<OverlapReport, ApiError> {
        self.edit(|p| {
            if p.scan(id).is_none() {
                return Err(ApiError::not_found("scan_id", format!("no scan {id}")));
            }
            Ok(p.verify_scan(id, mode)?.clone())
        })
    }

    pub fn generate_shot(&mut self, id: u32, dt: Option<f64>) -> Result<Trajectory, ApiError> {
        let dt = dt.unwrap_or(self.settings.tick);
        self.edit(|p| {
            if p.drone(id).is_none() {
                return Err(ApiError::not_found("drone_id", format!("no drone {id}")));
            }
            Ok(p.generate_drone_shot(id, dt)?.clone())
        })
    }

    // ---- simulation ----------------------------------------------------

    /// editing -> running builds a fresh world; paused -> running resumes.
    pub fn start(&mut self) -> Result<(), ApiError> {
        match self.run_state {
            RunState::Editing => {
                self.world = Some(world_from_project(&self.project, self.settings)?);
                self.run_state = RunState::Running;
                Ok(())
            }
            RunState::Paused => {
                self.run_state = RunState::Running;
                Ok(())
            }
            s => Err(conflict("start the simulation", s)),
        }
    }

    pub fn pause(&mut self) -> Result<(), ApiError> {
        match self.run_state {
            RunState::Running => {
                self.run_state = RunState::Paused;
                Ok(())
            }
            s => Err(conflict("pause", s)),
        }
    }

    /// running or paused -> editing, discarding the world.
    pub fn reset(&mut self) -> Result<(), ApiError> {
        match self.run_state {
            RunState::Running | RunState::Paused => {
                self.world = None;
                self.run_state = RunState::Editing;
                Ok(())
            }
            s => Err(conflict("reset the simulation", s)),
        }
    }

    /// Advances one tick. Valid while running, paused (single stepping) or
    /// in free play.
    pub fn advance(&mut self) -> Result<TickOutput, ApiError> {
        if self.run_state == RunState::Editing {
            return Err(conflict("step the simulation", self.run_state));
        }
        let world = self.world.as_mut().expect("world exists outside editing");
        let events = world.step(self.settings.tick)?;
        self.total_ticks += 1;
        Ok(TickOutput {
            state: world.snapshot(),
            events,
        })
    }

    /// Simulates the whole project headlessly without leaving editing.
    pub fn run_headless(&self, seconds: f64) -> Result<RunSummary, ApiError> {
        if self.run_state != RunState::Editing {
            return Err(conflict("run a headless simulation", self.run_state));
        }
        if !(seconds.is_finite() && seconds >= 0.0) {
            return Err(ApiError::validation(
                "seconds",
                format!("must be a non-negative number, got {seconds}"),
            ));
        }
        let mut world = world_from_project(&self.project, self.settings)?;
        let ticks = ticks_for(&world, seconds);
        let run = simulate(&mut world, ticks, &[])?;
        Ok(RunSummary {
            ticks,
            coverage: shot_coverage(&self.project, &run.trace),
            events: run.events,
            final_state: world.snapshot(),
        })
    }

    // ---- free play -----------------------------------------------------

    /// editing -> freeplay with `drone_id` under manual control from its
    /// home pose; every other drone flies its trajectory or plan.
    pub fn enter_freeplay(&mut self, drone_id: u32) -> Result<(), ApiError> {
        if self.run_state != RunState::Editing {
            return Err(conflict("enter free play", self.run_state));
        }
        let home = self
            .project
            .drone(drone_id)
            .ok_or_else(|| ApiError::not_found("drone_id", format!("no drone {drone_id}")))?
            .home;
        let mut world = world_from_project(&self.project, self.settings)?;
        let drone = world.drone_mut(drone_id).expect("world mirrors project drones");
        drone.mode = DroneMode::Manual;
        drone.state = DroneState::at(home);
        world.start_recording(drone_id)?;
        self.world = Some(world);
        self.freeplay_drone = Some(drone_id);
        self.run_state = RunState::Freeplay;
        Ok(())
    }

    pub fn control(&mut self, drone_id: u32, input: ControlInput) -> Result<(), ApiError> {
        if self.run_state != RunState::Freeplay {
            return Err(conflict("send controls", self.run_state));
        }
        if self.freeplay_drone != Some(drone_id) {
            return Err(ApiError::validation(
                "drone_id",
                format!("drone {drone_id} is not the drone under manual control"),
            ));
        }
        self.world
            .as_mut()
            .expect("world exists in free play")
            .set_control(drone_id, input)?;
        Ok(())
    }

    /// freeplay -> editing. The recording is downsampled to one waypoint
    /// per second and attached to the drone as its recorded path.
    pub fn exit_freeplay(&mut self) -> Result<Option<FlightPlan>, ApiError> {
        if self.run_state != RunState::Freeplay {
            return Err(conflict("exit free play", self.run_state));
        }
        let drone_id = self.freeplay_drone.expect("set in free play");
        let recording = self.world.as_mut().and_then(|w| w.take_recording(drone_id));
        let plan = match recording {
            Some(rec) if rec.samples.len() >= 2 => Some(record_and_export(&rec, self.project.origin, RECORD_INTERVAL)?),
            _ => None,
        };
        self.world = None;
        self.freeplay_drone = None;
        self.run_state = RunState::Editing;
        if let Some(plan) = &plan {
            self.edit(|p| {
                if let Some(d) = p.drone_mut(drone_id) {
                    d.recorded_path = Some(plan.clone());
                }
                Ok(())
            })?;
        }
        Ok(plan)
    }

    // ---- export --------------------------------------------------------

    pub fn export(&self, query: &ExportQuery) -> Result<Vec<u8>, ApiError> {
        let p = &self.project;
        let scan_plan = |id: u32| -> Result<&ScanPlan, ApiError> {
            p.scan(id)
                .ok_or_else(|| ApiError::not_found("scan_id", format!("no scan {id}")))?
                .plan
                .as_ref()
                .ok_or_else(|| ApiError::validation("scan_id", format!("scan {id} has no generated plan")))
        };
        match query.format {
            ExportFormat::Project => Ok(save_project(p)?),
            ExportFormat::Manifest => {
                let id = query
                    .scan_id
                    .ok_or_else(|| ApiError::validation("scan_id", "the manifest export needs a scan"))?;
                Ok(export_capture_manifest(scan_plan(id)?, &p.origin)?.into_bytes())
            }
            ExportFormat::Qgc | ExportFormat::Litchi => {
                let plan = match (query.scan_id, query.drone_id) {
                    (Some(id), _) => FlightPlan::from_scan(p.origin, scan_plan(id)?)?,
                    (None, Some(id)) => self.drone_plan(id, query.source, query.interval)?,
                    (None, None) => {
                        return Err(ApiError::validation(
                            "drone_id",
                            "plan exports need a drone_id or a scan_id",
                        ))
                    }
                };
                Ok(match query.format {
                    ExportFormat::Qgc => export_qgc_plan(&plan)?,
                    _ => export_litchi_csv(&plan)?.into_bytes(),
                })
            }
        }
    }

    fn drone_plan(&self, id: u32, source: PlanSource, interval: Option<f64>) -> Result<FlightPlan, ApiError> {
        let d = self
            .project
            .drone(id)
            .ok_or_else(|| ApiError::not_found("drone_id", format!("no drone {id}")))?;
        let missing = |what: &str| ApiError::validation("source", format!("drone {id} has no {what}"));
        match source {
            PlanSource::Trajectory => {
                let traj = d.trajectory.as_ref().ok_or_else(|| missing("generated trajectory"))?;
                Ok(FlightPlan::from_timed_poses(
                    self.project.origin,
                    &traj.timed_poses(),
                    interval.unwrap_or(RECORD_INTERVAL),
                )?)
            }
            PlanSource::FlightPlan => d.flight_plan.clone().ok_or_else(|| missing("flight plan")),
            PlanSource::Recorded => d.recorded_path.clone().ok_or_else(|| missing("recorded path")),
        }
    }
}
