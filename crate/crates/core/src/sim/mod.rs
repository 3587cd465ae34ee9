//! Deterministic fixed-tick simulation of drones and foreground actors.
//!
//! The world advances in fixed ticks (20 Hz by default) with explicit Euler
//! integration. Nothing in a step depends on wall-clock time or unordered
//! iteration, so identical initial states and control logs always produce
//! bit-identical traces.
//!
//! Wind acts on manually flown drones only; trajectory and plan followers
//! are treated as perfectly position-controlled within their rate limits.

pub mod actor;
pub mod control_log;
pub mod drone;
pub mod terrain;
pub mod wind;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use actor::{follow_path, Actor, ActorKind};
pub use control_log::{read_control_log, write_control_log, ControlRecord};
pub use drone::{
    apply_manual_control, record_and_export, ControlInput, DroneLimits, DroneMode, DroneSim, DroneState,
    RecordedSample, Recording,
};
pub use terrain::{terrain_height_at, Terrain};
pub use wind::{wind_velocity, Wind};

use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{point_in_frustum, CameraIntrinsics, EnuPoint, Pose};
use crate::shot::Trajectory;

pub const DEFAULT_TICK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    /// Fixed step, seconds.
    pub tick: f64,
    /// Minimum height above terrain before a warning, metres.
    pub terrain_proximity: f64,
    /// Minimum drone-actor separation before a warning, metres.
    pub actor_proximity: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            tick: DEFAULT_TICK,
            terrain_proximity: 5.0,
            actor_proximity: 3.0,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("settings.tick", self.tick)?;
        ensure_positive("settings.terrain_proximity", self.terrain_proximity)?;
        ensure_positive("settings.actor_proximity", self.actor_proximity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TerrainProximity,
    ActorProximity,
    OutOfBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub tick: u64,
    pub time: f64,
    pub kind: EventKind,
    /// Drone id first, then the actor id for actor proximity.
    pub subjects: Vec<u32>,
    /// Height above terrain, separation, or signed distance to the terrain
    /// edge (negative outside), depending on the kind.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSnapshot {
    pub id: u32,
    pub pose: Pose,
    pub velocity: EnuPoint,
    pub camera: CameraIntrinsics,
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorSnapshot {
    pub id: u32,
    pub kind: ActorKind,
    pub pose: Pose,
}

/// Immutable copy of every pose in the world at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSnapshot {
    pub tick: u64,
    pub time: f64,
    pub drones: Vec<DroneSnapshot>,
    pub actors: Vec<ActorSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct World {
    #[serde(default)]
    pub settings: SimSettings,
    #[serde(default)]
    pub tick: u64,
    #[serde(default)]
    pub terrain: Option<Terrain>,
    #[serde(default)]
    pub wind: Wind,
    #[serde(default)]
    pub actors: Vec<Actor>,
    #[serde(default)]
    pub drones: Vec<DroneSim>,
    /// Controls for the next tick, one per drone.
    #[serde(default)]
    pub pending_controls: BTreeMap<u32, ControlInput>,
}

impl World {
    pub fn new(settings: SimSettings) -> Self {
        World {
            settings,
            ..World::default()
        }
    }

    /// Checks the configuration. Degenerate worlds are rejected here rather
    /// than during stepping.
    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        self.wind.validate()?;
        let mut seen = BTreeSet::new();
        for a in &self.actors {
            if !seen.insert(a.id) {
                return Err(Error::Integrity {
                    id: a.id.to_string(),
                    context: "duplicate actor id".into(),
                });
            }
            a.validate()?;
            if let Some(t) = &self.terrain {
                a.validate_on(t)?;
            }
        }
        let mut seen = BTreeSet::new();
        for d in &self.drones {
            if !seen.insert(d.id) {
                return Err(Error::Integrity {
                    id: d.id.to_string(),
                    context: "duplicate drone id".into(),
                });
            }
            d.limits.validate()?;
            d.state.position.validate(&format!("drones[{}].position", d.id))?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.settings.tick
    }

    pub fn drone(&self, id: u32) -> Option<&DroneSim> {
        self.drones.iter().find(|d| d.id == id)
    }

    pub fn drone_mut(&mut self, id: u32) -> Option<&mut DroneSim> {
        self.drones.iter_mut().find(|d| d.id == id)
    }

    pub fn actor(&self, id: u32) -> Option<&Actor> {
        self.actors.iter().find(|a| a.id == id)
    }

    /// Queues a control for the next tick. A later call for the same drone
    /// within one tick replaces the earlier one.
    pub fn set_control(&mut self, drone_id: u32, input: ControlInput) -> Result<()> {
        match self.drone(drone_id) {
            None => Err(Error::invalid("drone_id", format!("no drone {drone_id}"))),
            Some(d) if d.mode != DroneMode::Manual => Err(Error::invalid(
                "drone_id",
                format!("drone {drone_id} is not under manual control"),
            )),
            Some(_) => {
                self.pending_controls.insert(drone_id, input.clamped());
                Ok(())
            }
        }
    }

    /// Starts recording a drone's flight from its current pose.
    pub fn start_recording(&mut self, drone_id: u32) -> Result<()> {
        let (time, dt) = (self.time(), self.settings.tick);
        let d = self
            .drone_mut(drone_id)
            .ok_or_else(|| Error::invalid("drone_id", format!("no drone {drone_id}")))?;
        let mut rec = Recording::new(drone_id, dt);
        rec.samples.push(RecordedSample {
            time,
            pose: d.state.pose(),
        });
        d.recording = Some(rec);
        Ok(())
    }

    pub fn take_recording(&mut self, drone_id: u32) -> Option<Recording> {
        self.drone_mut(drone_id)?.recording.take()
    }

    /// Advances one fixed tick and returns the warnings raised at the new
    /// state. Any `dt` other than the configured tick is rejected.
    pub fn step(&mut self, dt: f64) -> Result<Vec<SimEvent>> {
        if dt != self.settings.tick {
            return Err(Error::invalid(
                "dt",
                format!(
                    "the engine only runs at its fixed tick of {} s, got {dt}",
                    self.settings.tick
                ),
            ));
        }
        let t_prev = self.time();
        self.tick += 1;
        let t = self.time();

        for actor in &mut self.actors {
            *actor = follow_path(actor, dt);
        }
        let controls = std::mem::take(&mut self.pending_controls);
        for drone in &mut self.drones {
            *drone = match drone.mode {
                DroneMode::Manual => {
                    let input = controls.get(&drone.id).copied().unwrap_or_default();
                    apply_manual_control(drone, &input, &self.wind, t_prev, dt)
                }
                _ => drone::advance_autonomous(drone, t, dt),
            };
            let pose = drone.state.pose();
            if let Some(rec) = &mut drone.recording {
                rec.samples.push(RecordedSample { time: t, pose });
            }
        }
        Ok(self.detect_events())
    }

    /// Threshold violations at the current state, in drone order.
    pub fn detect_events(&self) -> Vec<SimEvent> {
        let (tick, time) = (self.tick, self.time());
        let mut events = Vec::new();
        for drone in &self.drones {
            let p = drone.state.position;
            let agl = match &self.terrain {
                Some(t) => {
                    let edge = t.edge_distance(p.east, p.north);
                    if edge < 0.0 {
                        events.push(SimEvent {
                            tick,
                            time,
                            kind: EventKind::OutOfBounds,
                            subjects: vec![drone.id],
                            distance: edge,
                        });
                        None
                    } else {
                        t.height_at(p.east, p.north).ok().map(|h| p.up - h)
                    }
                }
                None => Some(p.up),
            };
            if let Some(agl) = agl {
                if agl < self.settings.terrain_proximity {
                    events.push(SimEvent {
                        tick,
                        time,
                        kind: EventKind::TerrainProximity,
                        subjects: vec![drone.id],
                        distance: agl,
                    });
                }
            }
            for actor in &self.actors {
                let d = p.distance(&actor.pose().position);
                if d < self.settings.actor_proximity {
                    events.push(SimEvent {
                        tick,
                        time,
                        kind: EventKind::ActorProximity,
                        subjects: vec![drone.id, actor.id],
                        distance: d,
                    });
                }
            }
        }
        events
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        WorldSnapshot {
            tick: self.tick,
            time: self.time(),
            drones: self
                .drones
                .iter()
                .map(|d| DroneSnapshot {
                    id: d.id,
                    pose: d.state.pose(),
                    velocity: d.state.velocity,
                    camera: d.camera,
                    manual: d.mode == DroneMode::Manual,
                })
                .collect(),
            actors: self
                .actors
                .iter()
                .map(|a| ActorSnapshot {
                    id: a.id,
                    kind: a.kind,
                    pose: a.pose(),
                })
                .collect(),
        }
    }
}

/// Functional form of [`World::step`].
pub fn step(world: &World, dt: f64) -> Result<(World, Vec<SimEvent>)> {
    let mut next = world.clone();
    let events = next.step(dt)?;
    Ok((next, events))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRun {
    /// Snapshot before the first step and after every step.
    pub trace: Vec<WorldSnapshot>,
    pub events: Vec<SimEvent>,
}

/// Runs `ticks` steps headlessly, feeding controls from a log. Log records
/// are applied in file order, so the last record for a drone in a tick wins.
pub fn simulate(world: &mut World, ticks: u64, controls: &[ControlRecord]) -> Result<SimRun> {
    world.validate()?;
    let dt = world.settings.tick;
    let mut trace = Vec::with_capacity(ticks as usize + 1);
    let mut events = Vec::new();
    trace.push(world.snapshot());
    let mut next_record = controls.partition_point(|r| r.tick < world.tick);
    for _ in 0..ticks {
        while let Some(r) = controls.get(next_record).filter(|r| r.tick == world.tick) {
            world.set_control(r.drone_id, r.input())?;
            next_record += 1;
        }
        events.extend(world.step(dt)?);
        trace.push(world.snapshot());
    }
    Ok(SimRun { trace, events })
}

/// Number of ticks covering `seconds` at the world's tick.
pub fn ticks_for(world: &World, seconds: f64) -> u64 {
    (seconds / world.settings.tick).round().max(0.0) as u64
}

/// Fraction of poses whose camera frustum contains the landmark.
pub fn pose_coverage<'a>(
    poses: impl IntoIterator<Item = &'a Pose>,
    camera: &CameraIntrinsics,
    landmark: &EnuPoint,
) -> f64 {
    let (mut seen, mut total) = (0usize, 0usize);
    for pose in poses {
        total += 1;
        if point_in_frustum(pose, camera, landmark).unwrap_or(false) {
            seen += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        seen as f64 / total as f64
    }
}

/// Fraction of trajectory samples in which the landmark is in frame.
pub fn landmark_coverage(trajectory: &Trajectory, camera: &CameraIntrinsics, landmark: &EnuPoint) -> f64 {
    pose_coverage(trajectory.samples.iter().map(|s| &s.pose), camera, landmark)
}
