//! Wire types for the `/v1/` HTTP API and the session stream.
//!
//! Bodies are JSON. Stream messages are JSON text frames with a `kind`
//! discriminator.

use std::fmt;
use std::str::FromStr;

use dronecine_core::flightplan::{FlightPlan, Waypoint};
use dronecine_core::geometry::{CameraIntrinsics, EnuPoint, Pose};
use dronecine_core::project::{Project, SceneMetadata, ShotCoverage};
use dronecine_core::scan::{OverlapMode, ScanArea, ScanConfig};
use dronecine_core::shot::{ShotType, TargetRef};
use dronecine_core::sim::{ActorKind, ControlInput, DroneLimits, SimEvent, Terrain, Wind, WorldSnapshot};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

pub const API_PREFIX: &str = "/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Malformed body or document.
    Parse,
    /// A field failed validation.
    Validation,
    /// A reference does not resolve, or an id is reused.
    Integrity,
    /// Unsupported schema version or unknown fields.
    Version,
    NotFound,
    /// The request is not allowed in the session's current run state.
    Conflict,
    Internal,
}

/// Body of every non-2xx response and of stream `error` messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiErrorBody {
    pub code: ErrorCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub reason: String,
}

impl fmt::Display for ApiErrorBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = serde_plain_code(self.code);
        match &self.field {
            Some(field) => write!(f, "{code} error at `{field}`: {}", self.reason),
            None => write!(f, "{code} error: {}", self.reason),
        }
    }
}

fn serde_plain_code(code: ErrorCode) -> &'static str {
    match code {
        ErrorCode::Parse => "parse",
        ErrorCode::Validation => "validation",
        ErrorCode::Integrity => "integrity",
        ErrorCode::Version => "version",
        ErrorCode::NotFound => "not_found",
        ErrorCode::Conflict => "conflict",
        ErrorCode::Internal => "internal",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Editing,
    Running,
    Paused,
    Freeplay,
}

/// How a running session advances. `Manual` sessions only move on explicit
/// step requests, which makes scripted runs reproducible over the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    #[default]
    Realtime,
    Manual,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CreateSessionRequest {
    #[serde(default)]
    pub project: Option<Project>,
    #[serde(default)]
    pub clock: Clock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: Uuid,
    pub run_state: RunState,
    pub clock: Clock,
    /// Simulation tick of the current run; 0 while editing.
    pub tick: u64,
    /// Ticks advanced over the session's lifetime. Never decreases.
    pub total_ticks: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freeplay_drone: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorDraft {
    /// Assigned by the service when absent.
    #[serde(default)]
    pub id: Option<u32>,
    pub kind: ActorKind,
    pub path: Vec<EnuPoint>,
    pub speed: f64,
    #[serde(rename = "loop", default)]
    pub looped: bool,
}

/// Actor options; absent fields are left unchanged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActorPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ActorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<EnuPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(rename = "loop", default, skip_serializing_if = "Option::is_none")]
    pub looped: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneDraft {
    #[serde(default)]
    pub id: Option<u32>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub camera: Option<CameraIntrinsics>,
    #[serde(default)]
    pub limits: Option<DroneLimits>,
    pub home: Pose,
}

/// Drone options; absent fields are left unchanged. Changing anything that
/// affects the shot discards the previously generated trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DronePatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraIntrinsics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<DroneLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub home: Option<Pose>,
    /// Shot speed along the path, m/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    /// Switches the shot type, resetting its parameters to the defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_type: Option<ShotType>,
    /// What the shot frames: a fixed point or an actor to follow.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follow_target: Option<TargetRef>,
    /// Full shot replacement, applied before the fields above.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot: Option<dronecine_core::shot::ShotSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointsUpdate {
    pub waypoints: Vec<Waypoint>,
}

/// Scene-wide settings; absent fields are left unchanged.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvironmentPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wind: Option<Wind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terrain: Option<Terrain>,
    /// Removes the terrain; the ground is then the plane up = 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub clear_terrain: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneMetadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDraft {
    pub area: ScanArea,
    #[serde(default)]
    pub config: ScanConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OverlapRequest {
    #[serde(default)]
    pub mode: OverlapMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShotRequest {
    /// Sample interval, seconds. Defaults to the simulation tick.
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRequest {
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub state: WorldSnapshot,
    pub events: Vec<SimEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub seconds: f64,
}

/// Result of a headless run of the whole project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub ticks: u64,
    pub events: Vec<SimEvent>,
    pub coverage: Vec<ShotCoverage>,
    pub final_state: WorldSnapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeplayEnter {
    pub drone_id: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeplayExit {
    /// Recording downsampled to one waypoint per second, also attached to
    /// the drone as `recorded_path`. Absent when nothing was recorded.
    pub recorded_path: Option<FlightPlan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlRequest {
    pub drone_id: u32,
    #[serde(default)]
    pub input: ControlInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    /// QGroundControl `.plan`
    Qgc,
    Litchi,
    /// Per-capture CSV of a scan plan.
    Manifest,
    /// Project document.
    Project,
}

impl ExportFormat {
    pub fn content_type(self) -> &'static str {
        match self {
            ExportFormat::Qgc | ExportFormat::Project => "application/json",
            ExportFormat::Litchi | ExportFormat::Manifest => "text/csv; charset=utf-8",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Qgc => "plan",
            ExportFormat::Litchi | ExportFormat::Manifest => "csv",
            ExportFormat::Project => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qgc" | "plan" => Ok(ExportFormat::Qgc),
            "litchi" | "csv" => Ok(ExportFormat::Litchi),
            "manifest" => Ok(ExportFormat::Manifest),
            "project" => Ok(ExportFormat::Project),
            other => Err(format!(
                "unknown export format `{other}` (expected qgc, litchi, manifest or project)"
            )),
        }
    }
}

/// Which of a drone's paths to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanSource {
    /// The generated shot trajectory, resampled.
    #[default]
    Trajectory,
    FlightPlan,
    Recorded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExportQuery {
    pub format: ExportFormat,
    #[serde(default)]
    pub drone_id: Option<u32>,
    #[serde(default)]
    pub scan_id: Option<u32>,
    #[serde(default)]
    pub source: PlanSource,
    /// Waypoint spacing when resampling a trajectory, seconds.
    #[serde(default)]
    pub interval: Option<f64>,
}

/// Server-to-client stream message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerMessage {
    /// Full snapshot after a tick.
    State {
        tick: u64,
        state: WorldSnapshot,
    },
    Event {
        tick: u64,
        event: SimEvent,
    },
    Error {
        tick: u64,
        #[serde(flatten)]
        error: ApiErrorBody,
    },
}

impl ServerMessage {
    pub fn tick(&self) -> u64 {
        match self {
            ServerMessage::State { tick, .. }
            | ServerMessage::Event { tick, .. }
            | ServerMessage::Error { tick, .. } => *tick,
        }
    }
}

/// Client-to-server stream message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClientMessage {
    /// Applied on the next tick; a later control for the same drone in the
    /// same tick replaces it.
    Control {
        drone_id: u32,
        #[serde(default)]
        input: ControlInput,
    },
    /// Advances a manual-clock session.
    Step { ticks: u64 },
}
