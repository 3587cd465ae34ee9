//! Local frames, camera intrinsics and the footprint / visibility math shared
//! by the planners and the simulator.
//!
//! Conventions used throughout the crate:
//! - positions are East-North-Up metres relative to a [`GeoOrigin`];
//! - yaw is measured in degrees clockwise from north, in `[0, 360)`;
//! - gimbal pitch is measured in degrees below the horizon (0 = horizon,
//!   90 = nadir) and is limited to `[-30, 90]`.
//!
//! The camera is mounted landscape with its long sensor side across the
//! direction of travel, so the in-track ground extent uses the sensor height
//! and the cross-track extent uses the sensor width.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Equatorial radius used by the spherical small-area geodetic model.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Origins closer to the poles than this are rejected by the geodetic model.
pub const MAX_ORIGIN_LATITUDE_DEG: f64 = 89.9;

pub const GIMBAL_MIN_DEG: f64 = -30.0;
pub const GIMBAL_MAX_DEG: f64 = 90.0;

/// Pinhole camera intrinsics in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCamera")]
pub struct CameraIntrinsics {
    sensor_width: f64,
    sensor_height: f64,
    focal_length: f64,
}

#[derive(Deserialize)]
struct RawCamera {
    sensor_width: f64,
    sensor_height: f64,
    focal_length: f64,
}

impl TryFrom<RawCamera> for CameraIntrinsics {
    type Error = Error;

    fn try_from(raw: RawCamera) -> Result<Self> {
        CameraIntrinsics::new(raw.sensor_width, raw.sensor_height, raw.focal_length)
    }
}

impl CameraIntrinsics {
    /// Builds a landscape camera. Portrait sensors (`width < height`) are
    /// rejected rather than silently rotated.
    pub fn new(sensor_width: f64, sensor_height: f64, focal_length: f64) -> Result<Self> {
        ensure_positive("camera.sensor_width", sensor_width)?;
        ensure_positive("camera.sensor_height", sensor_height)?;
        ensure_positive("camera.focal_length", focal_length)?;
        if sensor_width < sensor_height {
            return Err(Error::invalid(
                "camera.sensor_width",
                format!("landscape orientation required: width {sensor_width} < height {sensor_height}"),
            ));
        }
        Ok(CameraIntrinsics {
            sensor_width,
            sensor_height,
            focal_length,
        })
    }

    /// 23.66 x 13.3 mm sensor behind a 35 mm lens.
    pub fn reference() -> Self {
        CameraIntrinsics {
            sensor_width: 23.66,
            sensor_height: 13.3,
            focal_length: 35.0,
        }
    }

    pub fn sensor_width(&self) -> f64 {
        self.sensor_width
    }

    pub fn sensor_height(&self) -> f64 {
        self.sensor_height
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    /// Sensor dimension that images the given ground axis.
    pub fn sensor_size(&self, axis: FootprintAxis) -> f64 {
        match axis {
            FootprintAxis::InTrack => self.sensor_height,
            FootprintAxis::CrossTrack => self.sensor_width,
        }
    }

    /// Angular half field of view across the image width, in radians.
    pub fn half_fov_horizontal(&self) -> f64 {
        (self.sensor_width / (2.0 * self.focal_length)).atan()
    }

    /// Angular half field of view across the image height, in radians.
    pub fn half_fov_vertical(&self) -> f64 {
        (self.sensor_height / (2.0 * self.focal_length)).atan()
    }
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        CameraIntrinsics::reference()
    }
}

/// Camera and working distance that published shot and scan parameters were
/// tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSetup {
    pub camera: CameraIntrinsics,
    pub working_distance: f64,
}

impl ReferenceSetup {
    pub fn new(camera: CameraIntrinsics, working_distance: f64) -> Result<Self> {
        ensure_positive("reference.working_distance", working_distance)?;
        Ok(ReferenceSetup {
            camera,
            working_distance,
        })
    }
}

impl Default for ReferenceSetup {
    fn default() -> Self {
        ReferenceSetup {
            camera: CameraIntrinsics::reference(),
            working_distance: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FootprintAxis {
    InTrack,
    CrossTrack,
}

/// Point in the local z-up East-North-Up frame, metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnuPoint {
    pub east: f64,
    pub north: f64,
    pub up: f64,
}

impl EnuPoint {
    pub const ORIGIN: EnuPoint = EnuPoint {
        east: 0.0,
        north: 0.0,
        up: 0.0,
    };

    pub const fn new(east: f64, north: f64, up: f64) -> Self {
        EnuPoint { east, north, up }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        ensure_finite(&format!("{field}.east"), self.east)?;
        ensure_finite(&format!("{field}.north"), self.north)?;
        ensure_finite(&format!("{field}.up"), self.up)
    }

    pub fn dot(&self, other: &EnuPoint) -> f64 {
        self.east * other.east + self.north * other.north + self.up * other.up
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn horizontal_norm(&self) -> f64 {
        self.east.hypot(self.north)
    }

    pub fn distance(&self, other: &EnuPoint) -> f64 {
        (*self - *other).norm()
    }

    pub fn horizontal_distance(&self, other: &EnuPoint) -> f64 {
        (*self - *other).horizontal_norm()
    }

    pub fn lerp(&self, other: &EnuPoint, t: f64) -> EnuPoint {
        EnuPoint {
            east: self.east + (other.east - self.east) * t,
            north: self.north + (other.north - self.north) * t,
            up: self.up + (other.up - self.up) * t,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.east.is_finite() && self.north.is_finite() && self.up.is_finite()
    }
}

impl Add for EnuPoint {
    type Output = EnuPoint;

    fn add(self, rhs: EnuPoint) -> EnuPoint {
        EnuPoint::new(self.east + rhs.east, self.north + rhs.north, self.up + rhs.up)
    }
}

impl Sub for EnuPoint {
    type Output = EnuPoint;

    fn sub(self, rhs: EnuPoint) -> EnuPoint {
        EnuPoint::new(self.east - rhs.east, self.north - rhs.north, self.up - rhs.up)
    }
}

impl Mul<f64> for EnuPoint {
    type Output = EnuPoint;

    fn mul(self, rhs: f64) -> EnuPoint {
        EnuPoint::new(self.east * rhs, self.north * rhs, self.up * rhs)
    }
}

/// Geodetic anchor of the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrigin")]
pub struct GeoOrigin {
    latitude: f64,
    longitude: f64,
    altitude: f64,
}

#[derive(Deserialize)]
struct RawOrigin {
    latitude: f64,
    longitude: f64,
    altitude: f64,
}

impl TryFrom<RawOrigin> for GeoOrigin {
    type Error = Error;

    fn try_from(raw: RawOrigin) -> Result<Self> {
        GeoOrigin::new(raw.latitude, raw.longitude, raw.altitude)
    }
}

impl GeoOrigin {
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        ensure_finite("origin.latitude", latitude)?;
        ensure_finite("origin.longitude", longitude)?;
        ensure_finite("origin.altitude", altitude)?;
        if latitude.abs() >= 90.0 {
            return Err(Error::invalid("origin.latitude", "must satisfy |latitude| < 90"));
        }
        if longitude.abs() > 180.0 {
            return Err(Error::invalid("origin.longitude", "must satisfy |longitude| <= 180"));
        }
        Ok(GeoOrigin {
            latitude,
            longitude,
            altitude,
        })
    }

    pub fn latitude(&self) -> f64 {
        self.latitude
    }

    pub fn longitude(&self) -> f64 {
        self.longitude
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }
}

impl Default for GeoOrigin {
    /// Bristol harbourside, sea level.
    fn default() -> Self {
        GeoOrigin {
            latitude: 51.4500,
            longitude: -2.6000,
            altitude: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geodetic {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude: f64,
}

/// Camera pose: position plus heading and gimbal tilt.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: EnuPoint,
    /// Degrees clockwise from north.
    pub yaw: f64,
    /// Degrees below the horizon.
    pub gimbal_pitch: f64,
}

impl Pose {
    /// Normalises yaw into `[0, 360)` and rejects gimbal pitch outside
    /// `[-30, 90]`.
    pub fn new(position: EnuPoint, yaw: f64, gimbal_pitch: f64) -> Result<Self> {
        position.validate("pose.position")?;
        ensure_finite("pose.yaw", yaw)?;
        ensure_finite("pose.gimbal_pitch", gimbal_pitch)?;
        if !(GIMBAL_MIN_DEG..=GIMBAL_MAX_DEG).contains(&gimbal_pitch) {
            return Err(Error::invalid(
                "pose.gimbal_pitch",
                format!("{gimbal_pitch} outside [{GIMBAL_MIN_DEG}, {GIMBAL_MAX_DEG}]"),
            ));
        }
        Ok(Pose {
            position,
            yaw: normalize_yaw(yaw),
            gimbal_pitch,
        })
    }

    /// Optical axis, image-right and image-up unit vectors in ENU. The camera
    /// has no roll.
    pub fn camera_basis(&self) -> [EnuPoint; 3] {
        let yaw = self.yaw.to_radians();
        let pitch = self.gimbal_pitch.to_radians();
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let forward = EnuPoint::new(sy * cp, cy * cp, -sp);
        let right = EnuPoint::new(cy, -sy, 0.0);
        // right x forward
        let up = EnuPoint::new(
            right.north * forward.up - right.up * forward.north,
            right.up * forward.east - right.east * forward.up,
            right.east * forward.north - right.north * forward.east,
        );
        [forward, right, up]
    }
}

/// Wraps any finite angle into `[0, 360)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let wrapped = yaw.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if wrapped >= 360.0 {
        0.0
    } else {
        wrapped
    }
}

/// Bearing of a horizontal displacement, degrees clockwise from north.
pub fn bearing_deg(delta_east: f64, delta_north: f64) -> f64 {
    normalize_yaw(delta_east.atan2(delta_north).to_degrees())
}

/// Unit horizontal vector for a bearing in degrees clockwise from north.
pub fn bearing_unit(bearing_deg: f64) -> EnuPoint {
    let (s, c) = bearing_deg.to_radians().sin_cos();
    EnuPoint::new(s, c, 0.0)
}

/// Ground area imaged by a single exposure, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundFootprint {
    pub in_track_extent: f64,
    pub cross_track_extent: f64,
}

impl GroundFootprint {
    pub fn extent(&self, axis: FootprintAxis) -> f64 {
        match axis {
            FootprintAxis::InTrack => self.in_track_extent,
            FootprintAxis::CrossTrack => self.cross_track_extent,
        }
    }
}

/// Linear ground coverage at a working distance: `FOV = SS * WD / FL` per
/// sensor axis.
pub fn ground_footprint(camera: &CameraIntrinsics, working_distance: f64) -> Result<GroundFootprint> {
    ensure_positive("working_distance", working_distance)?;
    Ok(GroundFootprint {
        in_track_extent: camera.sensor_height * working_distance / camera.focal_length,
        cross_track_extent: camera.sensor_width * working_distance / camera.focal_length,
    })
}

/// Working distance that gives `actual` the same ground coverage on `axis`
/// as the reference camera has at the reference distance.
pub fn scale_working_distance(reference: &ReferenceSetup, actual: &CameraIntrinsics, axis: FootprintAxis) -> f64 {
    (reference.camera.sensor_size(axis) / actual.sensor_size(axis))
        * (actual.focal_length / reference.camera.focal_length)
        * reference.working_distance
}

/// Fraction of the image width covered by an object of `object_width` metres
/// seen face-on at `distance` metres.
pub fn image_width_fraction(camera: &CameraIntrinsics, distance: f64, object_width: f64) -> f64 {
    object_width * camera.focal_length / (distance * camera.sensor_width)
}

fn check_origin(origin: &GeoOrigin) -> Result<()> {
    if origin.latitude.abs() >= MAX_ORIGIN_LATITUDE_DEG {
        return Err(Error::UnsupportedLatitude(origin.latitude));
    }
    Ok(())
}

/// Spherical equirectangular conversion, adequate for areas of a few km.
pub fn enu_to_geodetic(origin: &GeoOrigin, p: &EnuPoint) -> Result<Geodetic> {
    check_origin(origin)?;
    let lat0 = origin.latitude.to_radians();
    let dlat = p.north / EARTH_RADIUS_M;
    let dlon = p.east / (EARTH_RADIUS_M * lat0.cos());
    Ok(Geodetic {
        latitude: origin.latitude + dlat.to_degrees(),
        longitude: origin.longitude + dlon.to_degrees(),
        altitude: origin.altitude + p.up,
    })
}

/// Inverse of [`enu_to_geodetic`].
pub fn geodetic_to_enu(origin: &GeoOrigin, g: &Geodetic) -> Result<EnuPoint> {
    check_origin(origin)?;
    let lat0 = origin.latitude.to_radians();
    let north = (g.latitude - origin.latitude).to_radians() * EARTH_RADIUS_M;
    let east = (g.longitude - origin.longitude).to_radians() * EARTH_RADIUS_M * lat0.cos();
    Ok(EnuPoint::new(east, north, g.altitude - origin.altitude))
}

/// True when `target` lies in front of the camera and within the angular
/// half field of view on both image axes (boundary inclusive).
pub fn point_in_frustum(pose: &Pose, camera: &CameraIntrinsics, target: &EnuPoint) -> Result<bool> {
    let d = *target - pose.position;
    if d.norm() < 1e-12 {
        return Err(Error::invalid("target", "coincides with the camera position"));
    }
    let [forward, right, up] = pose.camera_basis();
    let depth = d.dot(&forward);
    if depth <= 0.0 {
        return Ok(false);
    }
    let horizontal = d.dot(&right).abs().atan2(depth);
    let vertical = d.dot(&up).abs().atan2(depth);
    Ok(horizontal <= camera.half_fov_horizontal() && vertical <= camera.half_fov_vertical())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_footprint() -> GroundFootprint {
        ground_footprint(&CameraIntrinsics::reference(), 20.0).unwrap()
    }

    #[test]
    fn reference_footprint_values() {
        let fp = reference_footprint();
        assert_relative_eq!(fp.cross_track_extent, 13.52, epsilon = 1e-12);
        assert_relative_eq!(fp.in_track_extent, 7.60, epsilon = 1e-12);
    }

    #[test]
    fn footprint_identity_ratio_and_linearity() {
        let cam = CameraIntrinsics::new(35.0, 20.0, 35.0).unwrap();
        let fp = ground_footprint(&cam, 20.0).unwrap();
        assert_eq!(fp.cross_track_extent, 20.0);

        let doubled = ground_footprint(&CameraIntrinsics::reference(), 40.0).unwrap();
        let fp = reference_footprint();
        assert_relative_eq!(
            doubled.cross_track_extent,
            2.0 * fp.cross_track_extent,
            max_relative = 1e-12
        );
        assert_relative_eq!(doubled.in_track_extent, 2.0 * fp.in_track_extent, max_relative = 1e-12);
    }

    #[test]
    fn footprint_rejects_non_positive_distance() {
        let cam = CameraIntrinsics::reference();
        assert!(matches!(
            ground_footprint(&cam, 0.0),
            Err(Error::InvalidArgument { .. })
        ));
        assert!(ground_footprint(&cam, -3.0).is_err());
    }

    #[test]
    fn camera_rejects_portrait_and_non_positive() {
        assert!(CameraIntrinsics::new(13.3, 23.66, 35.0).is_err());
        assert!(CameraIntrinsics::new(0.0, 0.0, 35.0).is_err());
        assert!(CameraIntrinsics::new(23.66, 13.3, -1.0).is_err());
        let err = serde_json::from_str::<CameraIntrinsics>(
            r#"{"sensor_width": 10, "sensor_height": 20, "focal_length": 35}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn scaled_working_distance_examples() {
        let reference = ReferenceSetup::default();
        let same = CameraIntrinsics::reference();
        assert_eq!(
            scale_working_distance(&reference, &same, FootprintAxis::CrossTrack),
            20.0
        );

        let big_sensor = CameraIntrinsics::new(2.0 * 23.66, 2.0 * 13.3, 35.0).unwrap();
        assert_relative_eq!(
            scale_working_distance(&reference, &big_sensor, FootprintAxis::CrossTrack),
            10.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            scale_working_distance(&reference, &big_sensor, FootprintAxis::InTrack),
            10.0,
            epsilon = 1e-12
        );

        let long_lens = CameraIntrinsics::new(23.66, 13.3, 70.0).unwrap();
        assert_relative_eq!(
            scale_working_distance(&reference, &long_lens, FootprintAxis::InTrack),
            40.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn geodetic_examples() {
        let origin = GeoOrigin::new(51.45, -2.6, 12.0).unwrap();
        let g = enu_to_geodetic(&origin, &EnuPoint::ORIGIN).unwrap();
        assert_eq!((g.latitude, g.longitude, g.altitude), (51.45, -2.6, 12.0));

        let one_degree = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        assert_relative_eq!(one_degree, 111_319.490_793_273_57, epsilon = 1e-6);
        let g = enu_to_geodetic(&origin, &EnuPoint::new(0.0, one_degree, 0.0)).unwrap();
        assert_relative_eq!(g.latitude, 52.45, epsilon = 1e-12);

        let equator = GeoOrigin::new(0.0, 10.0, 0.0).unwrap();
        let g = enu_to_geodetic(&equator, &EnuPoint::new(500.0, 500.0, 0.0)).unwrap();
        assert_relative_eq!(g.latitude - 0.0, g.longitude - 10.0, epsilon = 1e-12);
    }

    #[test]
    fn geodetic_rejects_polar_origin() {
        let polar = GeoOrigin::new(89.95, 0.0, 0.0).unwrap();
        assert_eq!(
            enu_to_geodetic(&polar, &EnuPoint::ORIGIN),
            Err(Error::UnsupportedLatitude(89.95))
        );
        assert!(GeoOrigin::new(90.0, 0.0, 0.0).is_err());
        assert!(GeoOrigin::new(0.0, 181.0, 0.0).is_err());
    }

    #[test]
    fn yaw_normalisation() {
        assert_eq!(normalize_yaw(-90.0), 270.0);
        assert_eq!(normalize_yaw(360.0), 0.0);
        assert_eq!(normalize_yaw(-1e-20), 0.0);
        assert_eq!(bearing_deg(1.0, 0.0), 90.0);
        assert_eq!(bearing_deg(0.0, -1.0), 180.0);
    }

    #[test]
    fn frustum_axis_behind_and_coincident() {
        let pose = Pose::new(EnuPoint::new(0.0, 0.0, 10.0), 0.0, 0.0).unwrap();
        let cam = CameraIntrinsics::reference();
        assert!(point_in_frustum(&pose, &cam, &EnuPoint::new(0.0, 500.0, 10.0)).unwrap());
        assert!(!point_in_frustum(&pose, &cam, &EnuPoint::new(0.0, -5.0, 10.0)).unwrap());
        assert!(point_in_frustum(&pose, &cam, &EnuPoint::new(0.0, 0.0, 10.0)).is_err());

        let nadir = Pose::new(EnuPoint::new(3.0, 4.0, 30.0), 123.0, 90.0).unwrap();
        assert!(point_in_frustum(&nadir, &cam, &EnuPoint::new(3.0, 4.0, 0.0)).unwrap());
    }

    #[test]
    fn frustum_edge_of_half_fov() {
        let cam = CameraIntrinsics::reference();
        let pose = Pose::new(EnuPoint::new(5.0, -2.0, 30.0), 37.0, 20.0).unwrap();
        let [forward, right, up] = pose.camera_basis();
        for (axis, half) in [(right, cam.half_fov_horizontal()), (up, cam.half_fov_vertical())] {
            for (scale, expected) in [(0.999, true), (1.001, false)] {
                let angle: f64 = half * scale;
                let dir = forward * angle.cos() + axis * angle.sin();
                let target = pose.position + dir * 50.0;
                assert_eq!(point_in_frustum(&pose, &cam, &target).unwrap(), expected);
            }
        }
    }

    proptest! {
        #[test]
        fn footprint_invariant_under_rescaled_distance(
            w in 1.0f64..50.0, aspect in 0.3f64..1.0, f in 4.0f64..200.0,
            axis in prop_oneof![Just(FootprintAxis::InTrack), Just(FootprintAxis::CrossTrack)],
        ) {
            let reference = ReferenceSetup::default();
            let cam = CameraIntrinsics::new(w, w * aspect, f).unwrap();
            let wd = scale_working_distance(&reference, &cam, axis);
            let actual = ground_footprint(&cam, wd).unwrap().extent(axis);
            let expected = ground_footprint(&reference.camera, reference.working_distance).unwrap().extent(axis);
            prop_assert!((actual - expected).abs() <= 1e-9);
        }

        #[test]
        fn geodetic_round_trip(
            lat in -80.0f64..80.0, lon in -179.0f64..179.0,
            e in -10_000.0f64..10_000.0, n in -10_000.0f64..10_000.0, u in -500.0f64..500.0,
        ) {
            let origin = GeoOrigin::new(lat, lon, 40.0).unwrap();
            let p = EnuPoint::new(e, n, u);
            let back = geodetic_to_enu(&origin, &enu_to_geodetic(&origin, &p).unwrap()).unwrap();
            prop_assert!(back.distance(&p) <= 1e-6);
        }
    }
}
