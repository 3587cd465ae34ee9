use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::flightplan::FlightPlan;
use crate::geometry::{normalize_yaw, CameraIntrinsics, EnuPoint, GeoOrigin, Pose, GIMBAL_MAX_DEG, GIMBAL_MIN_DEG};
use crate::shot::Trajectory;

use super::wind::{wind_velocity, Wind};

/// Relative slack on rate limits so that motion planned exactly at a limit
/// is not clipped by rounding.
const LIMIT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneLimits {
    /// m/s
    pub max_horizontal_speed: f64,
    /// m/s
    pub max_climb_rate: f64,
    /// deg/s
    pub max_yaw_rate: f64,
    /// deg/s
    pub max_gimbal_rate: f64,
}

impl Default for DroneLimits {
    fn default() -> Self {
        DroneLimits {
            max_horizontal_speed: 10.0,
            max_climb_rate: 5.0,
            max_yaw_rate: 120.0,
            max_gimbal_rate: 90.0,
        }
    }
}

impl DroneLimits {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("limits.max_horizontal_speed", self.max_horizontal_speed)?;
        ensure_positive("limits.max_climb_rate", self.max_climb_rate)?;
        ensure_positive("limits.max_yaw_rate", self.max_yaw_rate)?;
        ensure_positive("limits.max_gimbal_rate", self.max_gimbal_rate)
    }
}

/// Normalised stick input. Every axis is clamped to `[-1, 1]` before use.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    #[serde(default)]
    pub forward: f64,
    #[serde(default)]
    pub right: f64,
    #[serde(default)]
    pub climb: f64,
    #[serde(default)]
    pub yaw_rate: f64,
    #[serde(default)]
    pub gimbal_rate: f64,
}

impl ControlInput {
    pub fn clamped(&self) -> ControlInput {
        let c = |v: f64| if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
        ControlInput {
            forward: c(self.forward),
            right: c(self.right),
            climb: c(self.climb),
            yaw_rate: c(self.yaw_rate),
            gimbal_rate: c(self.gimbal_rate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DroneState {
    pub position: EnuPoint,
    pub velocity: EnuPoint,
    pub yaw: f64,
    pub gimbal_pitch: f64,
}

impl DroneState {
    pub fn at(pose: Pose) -> Self {
        DroneState {
            position: pose.position,
            velocity: EnuPoint::ORIGIN,
            yaw: pose.yaw,
            gimbal_pitch: pose.gimbal_pitch,
        }
    }

    pub fn pose(&self) -> Pose {
        Pose {
            position: self.position,
            yaw: self.yaw,
            gimbal_pitch: self.gimbal_pitch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DroneMode {
    Manual,
    FollowTrajectory {
        trajectory: Trajectory,
        /// Simulation time at which the trajectory's t = 0 is flown.
        #[serde(default)]
        start_time: f64,
    },
    FollowPlan {
        plan: FlightPlan,
        #[serde(default)]
        next_waypoint: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordedSample {
    pub time: f64,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recording {
    pub drone_id: u32,
    pub dt: f64,
    pub samples: Vec<RecordedSample>,
}

impl Recording {
    pub fn new(drone_id: u32, dt: f64) -> Self {
        Recording {
            drone_id,
            dt,
            samples: Vec::new(),
        }
    }
}

/// Downsampled flight plan from a recorded flight; the first and last
/// recorded poses are kept exactly.
pub fn record_and_export(recording: &Recording, origin: GeoOrigin, interval: f64) -> Result<FlightPlan> {
    if recording.samples.len() < 2 {
        return Err(Error::invalid(
            "recording.samples",
            format!("need at least 2 samples, got {}", recording.samples.len()),
        ));
    }
    let samples: Vec<(f64, Pose)> = recording.samples.iter().map(|s| (s.time, s.pose)).collect();
    FlightPlan::from_timed_poses(origin, &samples, interval)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSim {
    pub id: u32,
    pub camera: CameraIntrinsics,
    pub limits: DroneLimits,
    pub mode: DroneMode,
    pub state: DroneState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recording: Option<Recording>,
}

impl DroneSim {
    pub fn new(id: u32, camera: CameraIntrinsics, limits: DroneLimits, mode: DroneMode, start: Pose) -> Self {
        DroneSim {
            id,
            camera,
            limits,
            mode,
            state: DroneState::at(start),
            recording: None,
        }
    }
}

/// Moves toward `to`, keeping the horizontal and vertical displacement
/// within the given per-step limits while preserving direction.
fn limited_move(from: EnuPoint, to: EnuPoint, max_horizontal: f64, max_vertical: f64) -> EnuPoint {
    let d = to - from;
    let h = d.horizontal_norm();
    let v = d.up.abs();
    if h <= max_horizontal * (1.0 + LIMIT_SLACK) && v <= max_vertical * (1.0 + LIMIT_SLACK) {
        return to;
    }
    let mut factor: f64 = 1.0;
    if h > 0.0 {
        factor = factor.min(max_horizontal / h);
    }
    if v > 0.0 {
        factor = factor.min(max_vertical / v);
    }
    from + d * factor
}

fn limited_yaw(current: f64, desired: f64, max_step: f64) -> f64 {
    let diff = (desired - current + 540.0).rem_euclid(360.0) - 180.0;
    if diff.abs() <= max_step * (1.0 + LIMIT_SLACK) {
        desired
    } else {
        normalize_yaw(current + max_step.copysign(diff))
    }
}

fn limited_linear(current: f64, desired: f64, max_step: f64) -> f64 {
    let diff = desired - current;
    if diff.abs() <= max_step * (1.0 + LIMIT_SLACK) {
        desired
    } else {
        current + max_step.copysign(diff)
    }
}

/// Velocity-commanded kinematic update for a manually flown drone.
///
/// Stick input is scaled by the limits (horizontal stick magnitude capped at
/// one), rotated from the body frame by the current yaw, and the wind at `t`
/// is added before a single explicit Euler step.
pub fn apply_manual_control(drone: &DroneSim, input: &ControlInput, wind: &Wind, t: f64, dt: f64) -> DroneSim {
    let c = input.clamped();
    let (mut forward, mut right) = (c.forward, c.right);
    let stick = forward.hypot(right);
    if stick > 1.0 {
        forward /= stick;
        right /= stick;
    }
    let (sy, cy) = drone.state.yaw.to_radians().sin_cos();
    let h = drone.limits.max_horizontal_speed;
    let commanded = EnuPoint::new(
        (forward * sy + right * cy) * h,
        (forward * cy - right * sy) * h,
        c.climb * drone.limits.max_climb_rate,
    );
    let velocity = commanded + wind_velocity(wind, t);
    let mut next = drone.clone();
    next.state = DroneState {
        position: drone.state.position + velocity * dt,
        velocity,
        yaw: normalize_yaw(drone.state.yaw + c.yaw_rate * drone.limits.max_yaw_rate * dt),
        gimbal_pitch: (drone.state.gimbal_pitch + c.gimbal_rate * drone.limits.max_gimbal_rate * dt)
            .clamp(GIMBAL_MIN_DEG, GIMBAL_MAX_DEG),
    };
    next
}

/// Rate-limited tracking of a desired pose. Poses that respect the limits
/// are reproduced exactly.
fn track_pose(drone: &DroneSim, desired: &Pose, max_horizontal_speed: f64, dt: f64) -> DroneState {
    let s = &drone.state;
    let position = limited_move(
        s.position,
        desired.position,
        max_horizontal_speed * dt,
        drone.limits.max_climb_rate * dt,
    );
    DroneState {
        position,
        velocity: (position - s.position) * (1.0 / dt),
        yaw: limited_yaw(s.yaw, desired.yaw, drone.limits.max_yaw_rate * dt),
        gimbal_pitch: limited_linear(s.gimbal_pitch, desired.gimbal_pitch, drone.limits.max_gimbal_rate * dt),
    }
}

/// Advances a drone in trajectory- or plan-following mode to time `t`.
/// Manual drones are returned unchanged.
pub(crate) fn advance_autonomous(drone: &DroneSim, t: f64, dt: f64) -> DroneSim {
    let mut next = drone.clone();
    match &mut next.mode {
        DroneMode::Manual => {}
        DroneMode::FollowTrajectory { trajectory, start_time } => {
            if let Some(desired) = trajectory.pose_at(t - *start_time) {
                next.state = track_pose(drone, &desired, drone.limits.max_horizontal_speed, dt);
            }
        }
        DroneMode::FollowPlan { plan, next_waypoint } => match plan.waypoints.get(*next_waypoint) {
            Some(wp) => {
                let desired = Pose {
                    position: wp.position,
                    yaw: wp.heading,
                    gimbal_pitch: wp.gimbal_pitch,
                };
                let speed = wp.speed.min(drone.limits.max_horizontal_speed);
                next.state = track_pose(drone, &desired, speed, dt);
                if next.state.position == wp.position {
                    *next_waypoint += 1;
                }
            }
            None => next.state.velocity = EnuPoint::ORIGIN,
        },
    }
    next
}
