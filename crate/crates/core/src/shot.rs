//! Parametric cinematic shots: ESTABLISH, CHASE, FLYBY, ELEVATOR and ORBIT.
//!
//! Every shot is sampled on a uniform time grid. Positions come from a
//! closed-form path (or, for CHASE, a speed-limited pursuit), and each
//! sample's yaw and gimbal pitch are solved so the camera points at the
//! target's position at that instant.
//!
//! Heights are measured from the target's own `up` coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::geometry::{
    bearing_deg, bearing_unit, scale_working_distance, CameraIntrinsics, EnuPoint, FootprintAxis, Pose, ReferenceSetup,
    GIMBAL_MAX_DEG, GIMBAL_MIN_DEG,
};

/// Below this horizontal separation the bearing to the target is treated as
/// undefined.
const NADIR_EPSILON: f64 = 1e-9;

/// What a shot is framed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetRef {
    StaticPoint { point: EnuPoint },
    Actor { actor_id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShotType {
    Establish,
    Chase,
    Flyby,
    Elevator,
    Orbit,
}

impl std::str::FromStr for ShotType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "establish" => Ok(ShotType::Establish),
            "chase" => Ok(ShotType::Chase),
            "flyby" => Ok(ShotType::Flyby),
            "elevator" => Ok(ShotType::Elevator),
            "orbit" => Ok(ShotType::Orbit),
            other => Err(Error::invalid("shot_type", format!("unknown shot type `{other}`"))),
        }
    }
}

/// Shot-specific geometry. Bearings are degrees clockwise from north; all
/// distances and heights are metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shot_type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShotParams {
    /// Straight approach toward the target along `bearing`, from
    /// (`start_distance`, `start_height`) to (`end_distance`, `end_height`).
    Establish {
        bearing: f64,
        start_distance: f64,
        end_distance: f64,
        start_height: f64,
        end_height: f64,
    },
    /// Pursuit at `follow_distance` behind the target's direction of travel.
    Chase {
        follow_distance: f64,
        height: f64,
        duration: f64,
        /// Where the drone starts; defaults to the converged chase position.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<EnuPoint>,
    },
    /// Straight pass of `leg_length` travelling along `bearing`, centred on
    /// the target and offset `offset` metres to the right of the track.
    Flyby {
        offset: f64,
        leg_length: f64,
        height: f64,
        bearing: f64,
    },
    /// Vertical climb or descent at a fixed anchor `distance` metres from the
    /// target along `bearing`.
    Elevator {
        distance: f64,
        bearing: f64,
        start_height: f64,
        end_height: f64,
    },
    /// Circle about the target's vertical axis. `start_azimuth` is measured
    /// counter-clockwise from east; positive `arc` (degrees) flies
    /// counter-clockwise.
    Orbit {
        radius: f64,
        height: f64,
        start_azimuth: f64,
        arc: f64,
    },
}

impl ShotParams {
    pub fn shot_type(&self) -> ShotType {
        match self {
            ShotParams::Establish { .. } => ShotType::Establish,
            ShotParams::Chase { .. } => ShotType::Chase,
            ShotParams::Flyby { .. } => ShotType::Flyby,
            ShotParams::Elevator { .. } => ShotType::Elevator,
            ShotParams::Orbit { .. } => ShotType::Orbit,
        }
    }

    /// Stock parameters for each shot type. These are tunable starting
    /// points, not calibrated values.
    pub fn defaults(shot_type: ShotType) -> Self {
        match shot_type {
            ShotType::Establish => ShotParams::Establish {
                bearing: 0.0,
                start_distance: 80.0,
                end_distance: 20.0,
                start_height: 50.0,
                end_height: 10.0,
            },
            ShotType::Chase => ShotParams::Chase {
                follow_distance: 10.0,
                height: 10.0,
                duration: 20.0,
                start: None,
            },
            ShotType::Flyby => ShotParams::Flyby {
                offset: 15.0,
                leg_length: 60.0,
                height: 10.0,
                bearing: 0.0,
            },
            ShotType::Elevator => ShotParams::Elevator {
                distance: 15.0,
                bearing: 180.0,
                start_height: 10.0,
                end_height: 50.0,
            },
            ShotType::Orbit => ShotParams::Orbit {
                radius: 30.0,
                height: 20.0,
                start_azimuth: 0.0,
                arc: 360.0,
            },
        }
    }

    fn scaled(&self, k: f64) -> Self {
        match *self {
            ShotParams::Establish {
                bearing,
                start_distance,
                end_distance,
                start_height,
                end_height,
            } => ShotParams::Establish {
                bearing,
                start_distance: start_distance * k,
                end_distance: end_distance * k,
                start_height: start_height * k,
                end_height: end_height * k,
            },
            ShotParams::Chase {
                follow_distance,
                height,
                duration,
                start,
            } => ShotParams::Chase {
                follow_distance: follow_distance * k,
                height: height * k,
                duration,
                start,
            },
            ShotParams::Flyby {
                offset,
                leg_length,
                height,
                bearing,
            } => ShotParams::Flyby {
                offset: offset * k,
                leg_length: leg_length * k,
                height: height * k,
                bearing,
            },
            ShotParams::Elevator {
                distance,
                bearing,
                start_height,
                end_height,
            } => ShotParams::Elevator {
                distance: distance * k,
                bearing,
                start_height: start_height * k,
                end_height: end_height * k,
            },
            ShotParams::Orbit {
                radius,
                height,
                start_azimuth,
                arc,
            } => ShotParams::Orbit {
                radius: radius * k,
                height: height * k,
                start_azimuth,
                arc,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let positive: Vec<(&str, f64)> = match *self {
            ShotParams::Establish {
                start_distance,
                end_distance,
                start_height,
                end_height,
                ..
            } => vec![
                ("start_distance", start_distance),
                ("end_distance", end_distance),
                ("start_height", start_height),
                ("end_height", end_height),
            ],
            ShotParams::Chase {
                follow_distance,
                height,
                duration,
                ..
            } => vec![
                ("follow_distance", follow_distance),
                ("height", height),
                ("duration", duration),
            ],
            ShotParams::Flyby {
                offset,
                leg_length,
                height,
                ..
            } => vec![("offset", offset), ("leg_length", leg_length), ("height", height)],
            ShotParams::Elevator {
                distance,
                start_height,
                end_height,
                ..
            } => vec![
                ("distance", distance),
                ("start_height", start_height),
                ("end_height", end_height),
            ],
            ShotParams::Orbit { radius, height, .. } => vec![("radius", radius), ("height", height)],
        };
        for (name, value) in positive {
            ensure_positive(&format!("shot.{name}"), value)?;
        }
        match *self {
            ShotParams::Establish { bearing, .. }
            | ShotParams::Flyby { bearing, .. }
            | ShotParams::Elevator { bearing, .. } => ensure_finite("shot.bearing", bearing),
            ShotParams::Orbit { start_azimuth, arc, .. } => {
                ensure_finite("shot.start_azimuth", start_azimuth)?;
                ensure_finite("shot.arc", arc)?;
                if arc == 0.0 {
                    return Err(Error::ZeroLength("orbit arc is zero".into()));
                }
                Ok(())
            }
            ShotParams::Chase { start, .. } => match start {
                Some(p) => p.validate("shot.start"),
                None => Ok(()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotSpec {
    pub target: TargetRef,
    /// Metres per second along the path.
    pub speed: f64,
    pub camera: CameraIntrinsics,
    #[serde(flatten)]
    pub params: ShotParams,
}

impl ShotSpec {
    pub fn new(shot_type: ShotType, target: TargetRef) -> Self {
        ShotSpec {
            target,
            speed: 5.0,
            camera: CameraIntrinsics::reference(),
            params: ShotParams::defaults(shot_type),
        }
    }

    pub fn shot_type(&self) -> ShotType {
        self.params.shot_type()
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("shot.speed", self.speed)?;
        if let TargetRef::StaticPoint { point } = &self.target {
            point.validate("shot.target.point")?;
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub time: f64,
    pub pose: Pose,
    /// Point the camera was aimed at.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aim: Option<EnuPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.time)
    }

    /// Pose at time `t`, linearly interpolated between samples and held at
    /// the ends.
    pub fn pose_at(&self, t: f64) -> Option<Pose> {
        let first = self.samples.first()?;
        if t <= first.time {
            return Some(first.pose);
        }
        let last = self.samples.last()?;
        if t >= last.time {
            return Some(last.pose);
        }
        let idx = ((t - first.time) / self.dt).floor() as usize;
        let idx = idx.min(self.samples.len() - 2);
        let (a, b) = (&self.samples[idx], &self.samples[idx + 1]);
        let f = (t - a.time) / (b.time - a.time);
        if f <= 0.0 {
            return Some(a.pose);
        }
        if f >= 1.0 {
            return Some(b.pose);
        }
        let dyaw = (b.pose.yaw - a.pose.yaw + 540.0).rem_euclid(360.0) - 180.0;
        Some(Pose {
            position: a.pose.position.lerp(&b.pose.position, f),
            yaw: crate::geometry::normalize_yaw(a.pose.yaw + dyaw * f),
            gimbal_pitch: a.pose.gimbal_pitch + (b.pose.gimbal_pitch - a.pose.gimbal_pitch) * f,
        })
    }

    pub fn timed_poses(&self) -> Vec<(f64, Pose)> {
        self.samples.iter().map(|s| (s.time, s.pose)).collect()
    }
}

/// Result of aiming the camera at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aim {
    /// `None` when the target is straight above or below and the bearing is
    /// undefined.
    pub yaw: Option<f64>,
    pub gimbal_pitch: f64,
    /// The unclamped pitch fell outside the gimbal range.
    pub clamped: bool,
}

/// Yaw and gimbal pitch that put `target` on the optical axis.
pub fn aim_gimbal(drone: &EnuPoint, target: &EnuPoint) -> Result<Aim> {
    let d = *target - *drone;
    if d.norm() < 1e-12 {
        return Err(Error::invalid("target", "coincides with the drone position"));
    }
    let horizontal = d.horizontal_norm();
    let raw_pitch = (-d.up).atan2(horizontal).to_degrees();
    let gimbal_pitch = raw_pitch.clamp(GIMBAL_MIN_DEG, GIMBAL_MAX_DEG);
    let yaw = (horizontal > NADIR_EPSILON).then(|| bearing_deg(d.east, d.north));
    Ok(Aim {
        yaw,
        gimbal_pitch,
        clamped: gimbal_pitch != raw_pitch,
    })
}

/// Distance-like parameters scaled so the shot frames the target the same
/// way on `spec.camera` as it would on the reference camera.
pub fn rescale_shot_params(spec: &ShotSpec, reference: &ReferenceSetup) -> ShotSpec {
    let factor =
        scale_working_distance(reference, &spec.camera, FootprintAxis::CrossTrack) / reference.working_distance;
    if factor == 1.0 {
        return *spec;
    }
    ShotSpec {
        params: spec.params.scaled(factor),
        ..*spec
    }
}

fn sample_count(duration: f64, dt: f64) -> usize {
    (duration / dt + 1e-9).floor() as usize + 1
}

/// Samples a shot at step `dt`. `target_path` gives the target position at
/// any time in the shot (it is also evaluated at `dt` for CHASE).
pub fn generate_shot(spec: &ShotSpec, target_path: &dyn Fn(f64) -> EnuPoint, dt: f64) -> Result<Trajectory> {
    ensure_positive("dt", dt)?;
    spec.validate()?;
    let speed = spec.speed;
    let up = EnuPoint::new(0.0, 0.0, 1.0);
    let t0 = target_path(0.0);

    let positions: Vec<(f64, EnuPoint)> = match spec.params {
        ShotParams::Orbit {
            radius,
            height,
            start_azimuth,
            arc,
        } => {
            let arc_rad = arc.to_radians();
            let duration = arc_rad.abs() * radius / speed;
            let omega = arc_rad.signum() * speed / radius;
            let phase0 = start_azimuth.to_radians();
            (0..sample_count(duration, dt))
                .map(|k| {
                    let t = k as f64 * dt;
                    let (s, c) = (phase0 + omega * t).sin_cos();
                    let centre = target_path(t);
                    (t, centre + EnuPoint::new(radius * c, radius * s, height))
                })
                .collect()
        }
        ShotParams::Establish {
            bearing,
            start_distance,
            end_distance,
            start_height,
            end_height,
        } => {
            let length = (end_distance - start_distance).hypot(end_height - start_height);
            if length == 0.0 {
                return Err(Error::ZeroLength("establish start and end coincide".into()));
            }
            let duration = length / speed;
            let toward = bearing_unit(bearing);
            (0..sample_count(duration, dt))
                .map(|k| {
                    let t = k as f64 * dt;
                    let s = t / duration;
                    let d = start_distance + (end_distance - start_distance) * s;
                    let h = start_height + (end_height - start_height) * s;
                    (t, t0 - toward * d + up * h)
                })
                .collect()
        }
        ShotParams::Flyby {
            offset,
            leg_length,
            height,
            bearing,
        } => {
            let along = bearing_unit(bearing);
            let right = bearing_unit(bearing + 90.0);
            let start = t0 + right * offset - along * (leg_length / 2.0) + up * height;
            let duration = leg_length / speed;
            (0..sample_count(duration, dt))
                .map(|k| {
                    let t = k as f64 * dt;
                    (t, start + along * (speed * t))
                })
                .collect()
        }
        ShotParams::Elevator {
            distance,
            bearing,
            start_height,
            end_height,
        } => {
            if start_height == end_height {
                return Err(Error::ZeroLength("elevator start and end heights are equal".into()));
            }
            let rise = end_height - start_height;
            let duration = rise.abs() / speed;
            let mut anchor = t0 + bearing_unit(bearing) * distance;
            anchor.up = t0.up;
            (0..sample_count(duration, dt))
                .map(|k| {
                    let t = k as f64 * dt;
                    let mut p = anchor;
                    p.up = t0.up + start_height + rise.signum() * speed * t;
                    (t, p)
                })
                .collect()
        }
        ShotParams::Chase {
            follow_distance,
            height,
            duration,
            start,
        } => chase_positions(target_path, follow_distance, height, duration, start, speed, dt)?,
    };

    let mut samples = Vec::with_capacity(positions.len());
    let mut last_yaw = 0.0;
    for (t, position) in positions {
        let target = target_path(t);
        let aim = aim_gimbal(&position, &target)?;
        let yaw = aim.yaw.unwrap_or(last_yaw);
        last_yaw = yaw;
        samples.push(TrajectorySample {
            time: t,
            pose: Pose::new(position, yaw, aim.gimbal_pitch)?,
            aim: Some(target),
        });
    }
    Ok(Trajectory { dt, samples })
}

fn chase_positions(
    target_path: &dyn Fn(f64) -> EnuPoint,
    follow_distance: f64,
    height: f64,
    duration: f64,
    start: Option<EnuPoint>,
    speed: f64,
    dt: f64,
) -> Result<Vec<(f64, EnuPoint)>> {
    let up = EnuPoint::new(0.0, 0.0, height);
    let mut heading: Option<EnuPoint> = None;
    let mut out: Vec<(f64, EnuPoint)> = Vec::new();
    for k in 0..sample_count(duration, dt) {
        let t = k as f64 * dt;
        let now = target_path(t);
        // backward difference; the first sample has no history so looks ahead
        let velocity = if k == 0 {
            target_path(dt) - now
        } else {
            now - target_path(t - dt)
        };
        let norm = velocity.norm();
        if norm > 1e-12 {
            heading = Some(velocity * (1.0 / norm));
        }
        let dir = heading.ok_or(Error::DegenerateHeading { time: t })?;
        let commanded = now - dir * follow_distance + up;
        let position = match out.last() {
            None => start.unwrap_or(commanded),
            Some(&(_, prev)) => {
                let gap = commanded - prev;
                let dist = gap.norm();
                let max_step = speed * dt;
                if dist <= max_step {
                    commanded
                } else {
                    prev + gap * (max_step / dist)
                }
            }
        };
        out.push((t, position));
    }
    Ok(out)
}
