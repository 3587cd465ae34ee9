//! Export-neutral flight plans and their file formats.
//!
//! - QGroundControl `.plan` JSON (export and import of the emitted subset)
//! - Litchi waypoint CSV
//! - capture manifest CSV for scan plans
//!
//! All writers are deterministic: struct field order fixes the key order and
//! numbers are quantised before formatting. Non-finite values are refused
//! before anything is written.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enu_to_geodetic, geodetic_to_enu, EnuPoint, GeoOrigin, Geodetic, Pose};
use crate::scan::ScanPlan;

/// Waypoint speeds are floored here so hover segments stay valid.
pub const MIN_WAYPOINT_SPEED: f64 = 0.1;

/// Decimal places kept for waypoint latitude / longitude in plan files
/// (about 0.1 micrometre).
pub const PLAN_COORD_DECIMALS: i32 = 12;

/// Decimal places for latitude / longitude in CSV outputs (about 1 cm).
pub const CSV_COORD_DECIMALS: usize = 7;

const CMD_NAV_WAYPOINT: u16 = 16;
const CMD_DO_CHANGE_SPEED: u16 = 178;
const CMD_DO_MOUNT_CONTROL: u16 = 205;
const CMD_IMAGE_START_CAPTURE: u16 = 2000;

const FRAME_MISSION: u8 = 2;
const FRAME_GLOBAL_RELATIVE_ALT: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub position: EnuPoint,
    /// Ground speed toward this waypoint, m/s.
    pub speed: f64,
    /// Degrees clockwise from north.
    pub heading: f64,
    /// Degrees below the horizon.
    pub gimbal_pitch: f64,
    /// Trigger a photo on arrival.
    pub capture: bool,
}

impl Waypoint {
    fn validate(&self, index: usize) -> Result<()> {
        let field = |name: &str| format!("waypoints[{index}].{name}");
        if !self.position.is_finite() {
            return Err(Error::invalid(field("position"), "must be finite"));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::invalid(field("speed"), "must be strictly positive"));
        }
        if !(self.heading.is_finite() && (0.0..360.0).contains(&self.heading)) {
            return Err(Error::invalid(field("heading"), "must lie in [0, 360)"));
        }
        if !self.gimbal_pitch.is_finite() {
            return Err(Error::invalid(field("gimbal_pitch"), "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPlan {
    pub origin: GeoOrigin,
    pub waypoints: Vec<Waypoint>,
}

impl FlightPlan {
    pub fn new(origin: GeoOrigin, waypoints: Vec<Waypoint>) -> Result<Self> {
        let plan = FlightPlan { origin, waypoints };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(Error::invalid("waypoints", "a flight plan needs at least one waypoint"));
        }
        self.waypoints.iter().enumerate().try_for_each(|(i, w)| w.validate(i))
    }

    /// Downsamples uniformly timed poses to roughly one waypoint per
    /// `interval` seconds. The first and last poses are always kept as is.
    /// Speeds are the distance to the following waypoint over the elapsed
    /// time.
    pub fn from_timed_poses(origin: GeoOrigin, samples: &[(f64, Pose)], interval: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("samples", "no poses to export"));
        }
        if !(interval.is_finite() && interval > 0.0) {
            return Err(Error::invalid("interval", "must be strictly positive"));
        }
        let start = samples[0].0;
        let mut kept: Vec<&(f64, Pose)> = vec![&samples[0]];
        let mut next = 1u64;
        for s in &samples[1..samples.len() - 1] {
            if s.0 - start >= next as f64 * interval - 1e-9 {
                kept.push(s);
                while s.0 - start >= next as f64 * interval - 1e-9 {
                    next += 1;
                }
            }
        }
        if samples.len() > 1 {
            kept.push(&samples[samples.len() - 1]);
        }

        let mut waypoints: Vec<Waypoint> = Vec::with_capacity(kept.len());
        for (i, (t, pose)) in kept.iter().enumerate() {
            let speed = match kept.get(i + 1) {
                Some((t_next, next_pose)) if *t_next > *t => pose.position.distance(&next_pose.position) / (t_next - t),
                _ => waypoints.last().map_or(MIN_WAYPOINT_SPEED, |w| w.speed),
            };
            waypoints.push(Waypoint {
                position: pose.position,
                speed: speed.max(MIN_WAYPOINT_SPEED),
                heading: pose.yaw,
                gimbal_pitch: pose.gimbal_pitch,
                capture: false,
            });
        }
        FlightPlan::new(origin, waypoints)
    }

    /// Plan visiting every scan capture in order, with a capture at each.
    pub fn from_scan(origin: GeoOrigin, plan: &ScanPlan) -> Result<Self> {
        let waypoints = plan
            .captures()
            .map(|c| Waypoint {
                position: c.position,
                speed: plan.config.cruise_speed,
                heading: c.yaw,
                gimbal_pitch: c.gimbal_pitch,
                capture: true,
            })
            .collect();
        FlightPlan::new(origin, waypoints)
    }
}

fn quantize(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

/// Fixed-decimal formatting without a `-0` artefact.
fn fixed(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn waypoint_geodetic(plan: &FlightPlan, index: usize) -> Result<Geodetic> {
    let g = enu_to_geodetic(&plan.origin, &plan.waypoints[index].position)
        .map_err(|e| Error::Export(format!("waypoint {index}: {e}")))?;
    if !(g.latitude.abs() < 90.0 && g.longitude.is_finite()) {
        return Err(Error::Export(format!(
            "waypoint {index}: latitude {} outside the conversion domain",
            g.latitude
        )));
    }
    Ok(g)
}

fn validate_for_export(plan: &FlightPlan) -> Result<()> {
    plan.validate().map_err(|e| Error::Export(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct QgcPlanDocument {
    #[serde(rename = "fileType")]
    file_type: String,
    #[serde(rename = "geoFence", default)]
    geo_fence: serde_json::Value,
    #[serde(rename = "groundStation", default)]
    ground_station: String,
    mission: QgcMission,
    #[serde(rename = "rallyPoints", default)]
    rally_points: serde_json::Value,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct QgcMission {
    #[serde(rename = "cruiseSpeed", default)]
    cruise_speed: f64,
    #[serde(rename = "firmwareType", default)]
    firmware_type: u32,
    #[serde(rename = "globalPlanAltitudeMode", default)]
    global_plan_altitude_mode: u32,
    #[serde(rename = "hoverSpeed", default)]
    hover_speed: f64,
    items: Vec<QgcItem>,
    #[serde(rename = "plannedHomePosition")]
    planned_home_position: [f64; 3],
    #[serde(rename = "vehicleType", default)]
    vehicle_type: u32,
    version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct QgcItem {
    #[serde(rename = "AMSLAltAboveTerrain", default, skip_serializing_if = "Option::is_none")]
    amsl_alt_above_terrain: Option<f64>,
    #[serde(rename = "Altitude", default, skip_serializing_if = "Option::is_none")]
    altitude: Option<f64>,
    #[serde(rename = "AltitudeMode", default, skip_serializing_if = "Option::is_none")]
    altitude_mode: Option<u32>,
    #[serde(rename = "autoContinue")]
    auto_continue: bool,
    command: u16,
    #[serde(rename = "doJumpId")]
    do_jump_id: u32,
    frame: u8,
    params: [Option<f64>; 7],
    #[serde(rename = "type")]
    item_type: String,
}

impl QgcItem {
    fn command(command: u16, frame: u8, params: [f64; 7]) -> Self {
        QgcItem {
            amsl_alt_above_terrain: None,
            altitude: None,
            altitude_mode: None,
            auto_continue: true,
            command,
            do_jump_id: 0,
            frame,
            params: params.map(Some),
            item_type: "SimpleItem".into(),
        }
    }
}

/// QGroundControl plan document. Each waypoint becomes a NAV_WAYPOINT with
/// relative altitude, preceded by speed and gimbal commands whenever those
/// values change and followed by an image capture when requested.
pub fn export_qgc_plan(plan: &FlightPlan) -> Result<Vec<u8>> {
    validate_for_export(plan)?;
    let mut items = Vec::new();
    let mut speed: Option<f64> = None;
    let mut gimbal: Option<f64> = None;
    for (i, wp) in plan.waypoints.iter().enumerate() {
        let g = waypoint_geodetic(plan, i)?;
        if speed != Some(wp.speed) {
            items.push(QgcItem::command(
                CMD_DO_CHANGE_SPEED,
                FRAME_MISSION,
                [1.0, wp.speed, -1.0, 0.0, 0.0, 0.0, 0.0],
            ));
            speed = Some(wp.speed);
        }
        if gimbal != Some(wp.gimbal_pitch) {
            // mount pitch is negative below the horizon; mode 2 is MAVLink targeting
            items.push(QgcItem::command(
                CMD_DO_MOUNT_CONTROL,
                FRAME_MISSION,
                [-wp.gimbal_pitch, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
            ));
            gimbal = Some(wp.gimbal_pitch);
        }
        let mut nav = QgcItem::command(
            CMD_NAV_WAYPOINT,
            FRAME_GLOBAL_RELATIVE_ALT,
            [
                0.0,
                0.0,
                0.0,
                wp.heading,
                quantize(g.latitude, PLAN_COORD_DECIMALS),
                quantize(g.longitude, PLAN_COORD_DECIMALS),
                wp.position.up,
            ],
        );
        nav.altitude = Some(wp.position.up);
        nav.altitude_mode = Some(1);
        items.push(nav);
        if wp.capture {
            items.push(QgcItem::command(
                CMD_IMAGE_START_CAPTURE,
                FRAME_MISSION,
                [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            ));
        }
    }
    for (i, item) in items.iter_mut().enumerate() {
        item.do_jump_id = i as u32 + 1;
    }

    let first_speed = plan.waypoints[0].speed;
    let doc = QgcPlanDocument {
        file_type: "Plan".into(),
        geo_fence: serde_json::json!({ "circles": [], "polygons": [], "version": 2 }),
        ground_station: "QGroundControl".into(),
        mission: QgcMission {
            cruise_speed: first_speed,
            firmware_type: 12,
            global_plan_altitude_mode: 1,
            hover_speed: first_speed,
            items,
            planned_home_position: [plan.origin.latitude(), plan.origin.longitude(), plan.origin.altitude()],
            vehicle_type: 2,
            version: 2,
        },
        rally_points: serde_json::json!({ "points": [], "version": 2 }),
        version: 1,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| Error::Export(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Parses the subset of QGroundControl plans written by [`export_qgc_plan`].
pub fn import_qgc_plan(bytes: &[u8]) -> Result<FlightPlan> {
    let doc: QgcPlanDocument =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("malformed plan document: {e}")))?;
    if doc.file_type != "Plan" {
        return Err(Error::Parse(format!("unsupported fileType `{}`", doc.file_type)));
    }
    if doc.version != 1 {
        return Err(Error::Parse(format!("unsupported plan version {}", doc.version)));
    }
    let [lat, lon, alt] = doc.mission.planned_home_position;
    let origin = GeoOrigin::new(lat, lon, alt).map_err(|e| Error::Parse(format!("plannedHomePosition: {e}")))?;

    let param = |item: &QgcItem, index: usize, slot: usize| -> Result<f64> {
        item.params[slot]
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse(format!("item {index}: param{} is missing", slot + 1)))
    };

    let mut speed: Option<f64> = None;
    let mut gimbal = 0.0;
    let mut waypoints: Vec<Waypoint> = Vec::new();
    for (index, item) in doc.mission.items.iter().enumerate() {
        if item.item_type != "SimpleItem" {
            return Err(Error::Parse(format!(
                "item {index}: unsupported item type `{}`",
                item.item_type
            )));
        }
        match item.command {
            CMD_DO_CHANGE_SPEED => speed = Some(param(item, index, 1)?),
            CMD_DO_MOUNT_CONTROL => gimbal = -param(item, index, 0)?,
            CMD_NAV_WAYPOINT => {
                if item.frame != FRAME_GLOBAL_RELATIVE_ALT {
                    return Err(Error::Parse(format!(
                        "item {index}: unsupported frame {} (only relative altitude frame 3)",
                        item.frame
                    )));
                }
                let geodetic = Geodetic {
                    latitude: param(item, index, 4)?,
                    longitude: param(item, index, 5)?,
                    altitude: origin.altitude(),
                };
                let mut position = geodetic_to_enu(&origin, &geodetic)?;
                position.up = param(item, index, 6)?;
                let speed = speed
                    .or((doc.mission.cruise_speed > 0.0).then_some(doc.mission.cruise_speed))
                    .unwrap_or(MIN_WAYPOINT_SPEED);
                waypoints.push(Waypoint {
                    position,
                    speed,
                    heading: param(item, index, 3)?,
                    gimbal_pitch: gimbal,
                    capture: false,
                });
            }
            CMD_IMAGE_START_CAPTURE => match waypoints.last_mut() {
                Some(w) => w.capture = true,
                None => {
                    return Err(Error::Parse(format!(
                        "item {index}: image capture before the first waypoint"
                    )))
                }
            },
            other => return Err(Error::Parse(format!("item {index}: unsupported command id {other}"))),
        }
    }
    FlightPlan::new(origin, waypoints).map_err(|e| Error::Parse(e.to_string()))
}

pub const LITCHI_HEADER: &str =
    "latitude,longitude,altitude(m),heading(deg),curvesize(m),rotationdir,gimbalmode,gimbalpitchangle,actiontype1";

/// Litchi mission CSV. Altitude is relative to the take-off point and the
/// gimbal angle is negative below the horizon.
pub fn export_litchi_csv(plan: &FlightPlan) -> Result<String> {
    validate_for_export(plan)?;
    let mut out = String::new();
    out.push_str(LITCHI_HEADER);
    out.push('\n');
    for (i, wp) in plan.waypoints.iter().enumerate() {
        let g = waypoint_geodetic(plan, i)?;
        let _ = writeln!(
            out,
            "{},{},{},{},0,0,2,{},{}",
            fixed(g.latitude, CSV_COORD_DECIMALS),
            fixed(g.longitude, CSV_COORD_DECIMALS),
            fixed(wp.position.up, 2),
            fixed(wp.heading, 2),
            fixed(-wp.gimbal_pitch, 2),
            if wp.capture { 1 } else { -1 },
        );
    }
    Ok(out)
}

pub const MANIFEST_HEADER: &str = "index,latitude,longitude,altitude_m,heading_deg,gimbal_pitch_deg";

/// One row per capture point; altitude is above mean sea level and gimbal
/// pitch is positive below the horizon.
pub fn export_capture_manifest(plan: &ScanPlan, origin: &GeoOrigin) -> Result<String> {
    let mut out = String::new();
    out.push_str(MANIFEST_HEADER);
    out.push('\n');
    for (i, capture) in plan.captures().enumerate() {
        if !(capture.position.is_finite() && capture.yaw.is_finite() && capture.gimbal_pitch.is_finite()) {
            return Err(Error::Export(format!("capture {i} has a non-finite value")));
        }
        let g = enu_to_geodetic(origin, &capture.position).map_err(|e| Error::Export(format!("capture {i}: {e}")))?;
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            fixed(g.latitude, CSV_COORD_DECIMALS),
            fixed(g.longitude, CSV_COORD_DECIMALS),
            fixed(g.altitude, 3),
            fixed(capture.yaw, 2),
            fixed(capture.gimbal_pitch, 2),
        );
    }
    Ok(out)
}
